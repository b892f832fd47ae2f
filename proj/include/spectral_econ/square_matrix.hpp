#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace spectral_econ {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Entries at or below this value are not edges of the digraph view.
inline constexpr double kStructuralTolerance = 1e-12;

/// Dense n x n real matrix with an attached weighted-digraph view.
///
/// Entry (i, j) is the weight of edge i -> j. The value is immutable once
/// constructed; every entry is finite. Labels are optional and default to
/// 1-based node numbers when requested.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(Matrix entries, std::vector<std::string> labels = {});
    SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static SquareMatrix zeros(std::size_t n);
    static SquareMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(entries_.rows());
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    [[nodiscard]] const Matrix& entries() const noexcept { return entries_; }

    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] std::string label(std::size_t i) const;

    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const {
        return (*this)(i, j) > kStructuralTolerance;
    }
    [[nodiscard]] bool is_nonnegative() const;
    [[nodiscard]] bool is_symmetric(double tol = 0.0) const;
    [[nodiscard]] bool has_zero_diagonal() const;

    [[nodiscard]] SquareMatrix transposed() const;

    // Copy with row and column i zeroed; indices stay stable.
    [[nodiscard]] SquareMatrix without_node(std::size_t i) const;

    friend bool operator==(const SquareMatrix& a, const SquareMatrix& b) {
        return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_ &&
               a.labels_ == b.labels_;
    }

private:
    Matrix entries_;
    std::vector<std::string> labels_;
};

/// Throws InvalidInput unless every entry is >= 0.
void require_nonnegative(const SquareMatrix& m, const char* context);

}  // namespace spectral_econ
