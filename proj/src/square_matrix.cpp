#include "spectral_econ/square_matrix.hpp"

#include "spectral_econ/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace spectral_econ {

SquareMatrix::SquareMatrix(Matrix entries, std::vector<std::string> labels)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
    if (entries_.rows() != entries_.cols()) {
        throw InvalidInput(fmt::format("matrix must be square, got {}x{}", entries_.rows(),
                                       entries_.cols()));
    }
    if (!entries_.allFinite()) {
        throw InvalidInput("matrix contains non-finite entries");
    }
    if (!labels_.empty() && labels_.size() != size()) {
        throw InvalidInput(
            fmt::format("{} labels supplied for a {}-node matrix", labels_.size(), size()));
    }
}

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix m(n, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw InvalidInput("ragged matrix literal");
        }
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    *this = SquareMatrix(std::move(m));
}

SquareMatrix SquareMatrix::zeros(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return SquareMatrix(Matrix::Zero(k, k));
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return SquareMatrix(Matrix::Identity(k, k));
}

std::string SquareMatrix::label(std::size_t i) const {
    if (i < labels_.size()) return labels_[i];
    return std::to_string(i + 1);
}

bool SquareMatrix::is_nonnegative() const { return (entries_.array() >= 0.0).all(); }

bool SquareMatrix::is_symmetric(double tol) const {
    const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < entries_.cols(); ++j) {
            if (std::abs(entries_(i, j) - entries_(j, i)) > tol * scale) return false;
        }
    }
    return true;
}

bool SquareMatrix::has_zero_diagonal() const {
    return entries_.size() == 0 || (entries_.diagonal().array() == 0.0).all();
}

SquareMatrix SquareMatrix::transposed() const {
    return SquareMatrix(entries_.transpose(), labels_);
}

SquareMatrix SquareMatrix::without_node(std::size_t i) const {
    if (i >= size()) throw InvalidInput(fmt::format("node {} out of range", i));
    Matrix copy = entries_;
    const auto k = static_cast<Eigen::Index>(i);
    copy.row(k).setZero();
    copy.col(k).setZero();
    return SquareMatrix(std::move(copy), labels_);
}

void require_nonnegative(const SquareMatrix& m, const char* context) {
    for (Eigen::Index i = 0; i < m.entries().rows(); ++i) {
        for (Eigen::Index j = 0; j < m.entries().cols(); ++j) {
            if (m.entries()(i, j) < 0.0) {
                throw InvalidInput(fmt::format("{}: negative entry {} at ({}, {})", context,
                                               m.entries()(i, j), i, j));
            }
        }
    }
}

}  // namespace spectral_econ
