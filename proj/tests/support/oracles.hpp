#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the library's solvers; results are built from first principles (Neumann
// sums, boolean matrix powers, walk enumeration, plain power iteration).

#include "spectral_econ/square_matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using spectral_econ::Matrix;
using spectral_econ::SquareMatrix;
using spectral_econ::Vector;

/// Figure 1 graph, nodes 1..7 as 0..6.
inline SquareMatrix fig1_graph() {
    Matrix a = Matrix::Zero(7, 7);
    const int edges[][2] = {{1, 3}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {5, 7}, {1, 2}, {6, 7}};
    for (const auto& e : edges) {
        a(e[0] - 1, e[1] - 1) = 1.0;
        a(e[1] - 1, e[0] - 1) = 1.0;
    }
    return SquareMatrix(a);
}

/// Figure 2 benefits matrix B(0); entry (i, j) is the arrow i -> j.
inline SquareMatrix fig2_benefits() {
    return SquareMatrix{{0.0, 5.0, 0.0, 0.5},
                        {0.0, 0.0, 0.0, 0.5},
                        {7.0, 6.0, 0.0, 0.5},
                        {0.5, 0.5, 0.5, 0.0}};
}

/// Reachability closure by repeated boolean squaring.
inline Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reachability(const Matrix& a) {
    const auto n = a.rows();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) r(i, j) = (i == j) || a(i, j) > 1e-12;
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) r(i, j) = r(i, j) || (r(i, k) && r(k, j));
    return r;
}

inline bool irreducible(const Matrix& a) { return reachability(a).all(); }

/// gcd of t <= n with a closed walk of length t. Simple cycles have length
/// at most n and generate every closed walk length.
inline int period(const Matrix& a) {
    const auto n = a.rows();
    Eigen::MatrixXi pattern(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) pattern(i, j) = a(i, j) > 1e-12 ? 1 : 0;
    Eigen::MatrixXi power = pattern;
    int g = 0;
    for (Eigen::Index t = 1; t <= n; ++t) {
        if (power.diagonal().maxCoeff() > 0) g = std::gcd(g, static_cast<int>(t));
        Eigen::MatrixXi next = power * pattern;
        power = next.unaryExpr([](int v) { return v > 0 ? 1 : 0; });
    }
    return g;
}

/// k^T = z^T sum_{t<=T} delta^t M^t  (left) or sum delta^t M^t z (right).
inline Vector neumann(const Matrix& m, const Vector& z, double delta, int terms, bool left) {
    const Matrix op = left ? Matrix(m.transpose()) : m;
    Vector term = z;
    Vector sum = z;
    for (int t = 1; t <= terms; ++t) {
        term = delta * (op * term);
        sum += term;
    }
    return sum;
}

/// Sum over all walks w_0 -> ... -> w_t (t <= max_len) ending at j of
/// delta^t * z_{w_0} * prod of edge weights.
inline Vector walk_sum(const Matrix& m, const Vector& z, double delta, int max_len) {
    const auto n = m.rows();
    Vector k = Vector::Zero(n);
    std::function<void(Eigen::Index, int, double)> walk = [&](Eigen::Index at, int len, double w) {
        k[at] += w;
        if (len == max_len) return;
        for (Eigen::Index nxt = 0; nxt < n; ++nxt) {
            if (m(at, nxt) != 0.0) walk(nxt, len + 1, w * delta * m(at, nxt));
        }
    };
    for (Eigen::Index s = 0; s < n; ++s) walk(s, 0, z[s]);
    return k;
}

/// Power iteration on (I + M)^T for a nonnegative irreducible M; returns the
/// sum-1 left Perron vector and rho.
inline std::pair<double, Vector> left_perron_power(const Matrix& m, int iterations = 200000) {
    const auto n = m.rows();
    const Matrix op = (Matrix::Identity(n, n) + m).transpose();
    Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < iterations; ++it) {
        Vector next = op * v;
        next /= next.sum();
        const double diff = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (diff < 1e-16) break;
    }
    const double rho = (m.transpose() * v).sum() / v.sum();
    return {rho, v};
}

/// Row-stochastic M^t by repeated squaring (t a power of two).
inline Matrix stochastic_power(const Matrix& m, int log2_t) {
    Matrix p = m;
    for (int k = 0; k < log2_t; ++k) p = p * p;
    return p;
}

/// Random nonnegative matrix containing a Hamiltonian cycle, hence irreducible.
inline Matrix random_irreducible(std::mt19937_64& rng, int n, double density = 0.3) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix a = Matrix::Zero(n, n);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k < n; ++k) a(perm[k], perm[(k + 1) % n]) = 0.1 + u(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (u(rng) < density) a(i, j) = u(rng);
    return a;
}

/// Random symmetric matrix with entries in [-s, s] and zero diagonal.
inline Matrix random_symmetric(std::mt19937_64& rng, int n, double s) {
    std::uniform_real_distribution<double> u(-s, s);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = u(rng);
    return a;
}

/// Enumerates directed simple cycles of length <= max_len; calls f(product, length).
inline void for_each_cycle(const Matrix& b, int max_len, const std::function<void(double, int)>& f) {
    const auto n = b.rows();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::function<void(Eigen::Index, Eigen::Index, int, double)> extend =
        [&](Eigen::Index start, Eigen::Index at, int len, double prod) {
            for (Eigen::Index nxt = start; nxt < n; ++nxt) {
                if (b(at, nxt) <= 0.0) continue;
                if (nxt == start) {
                    f(prod * b(at, nxt), len);
                } else if (!used[static_cast<std::size_t>(nxt)] && len < max_len) {
                    used[static_cast<std::size_t>(nxt)] = true;
                    extend(start, nxt, len + 1, prod * b(at, nxt));
                    used[static_cast<std::size_t>(nxt)] = false;
                }
            }
        };
    for (Eigen::Index s = 0; s < n; ++s) {
        used[static_cast<std::size_t>(s)] = true;
        extend(s, s, 1, 1.0);
        used[static_cast<std::size_t>(s)] = false;
    }
}

/// Largest |eigenvalue| of a symmetric matrix by Jacobi rotations; slow but
/// independent of the library's solver. For n <= ~60.
inline Vector jacobi_eigenvalues(Matrix a) {
    const auto n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    return a.diagonal();
}

}  // namespace oracle
