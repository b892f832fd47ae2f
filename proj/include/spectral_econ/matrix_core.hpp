#pragma once

#include "spectral_econ/square_matrix.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace spectral_econ {

/// Spectral radius together with the positive left and right eigenvectors.
/// Both vectors are normalized to sum to one.
struct PerronPair {
    double rho = 0.0;
    Vector left;   // c with c^T M = rho c^T
    Vector right;  // r with M r = rho r
};

struct GelfandTerm {
    int t = 0;
    std::optional<double> value;  // trace(M^t)^(1/t); empty when the trace vanishes
};

struct PowerIterationResult {
    double rho = 0.0;
    Vector vector;  // sum-normalized
    int iterations = 0;
    bool converged = false;
};

enum class Side { left, right };

/// Strongly connected components of the positive-entry digraph, each sorted
/// ascending, listed in reverse topological order (Tarjan).
std::vector<std::vector<std::size_t>> strongly_connected_components(const SquareMatrix& m);

bool is_irreducible(const SquareMatrix& m);

/// gcd of all directed cycle lengths of an irreducible matrix.
int period(const SquareMatrix& m);
bool is_aperiodic(const SquareMatrix& m);
bool is_primitive(const SquareMatrix& m);

/// All eigenvalues (possibly complex) from a dense solver.
std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m);

double spectral_radius(const SquareMatrix& m);

/// Spectral radius of a nonnegative matrix computed blockwise over its
/// strongly connected components. Acyclic digraphs give exactly 0.
double nonnegative_spectral_radius(const SquareMatrix& m);

PerronPair perron_pair(const SquareMatrix& m);

/// Power iteration on M + shift*I, returning rho(M). The shift makes periodic
/// irreducible matrices converge.
PowerIterationResult power_iteration(const SquareMatrix& m, double shift = 1.0,
                                     int max_iterations = 100000, double tol = 1e-14);

std::vector<GelfandTerm> gelfand_trace_sequence(const SquareMatrix& m, int t_max);

/// delta * rho within this of 1 counts as divergent: the system is singular in practice.
inline constexpr double kDivergenceMargin = 1e-12;

/// Solves k^T = delta k^T M + z^T (left) or k = delta M k + z (right).
Vector resolvent_solve(const SquareMatrix& m, const Vector& z, double delta, Side side);

/// Same as resolvent_solve but with rho(M) supplied by the caller.
Vector resolvent_solve(const SquareMatrix& m, const Vector& z, double delta, Side side,
                       double rho);

double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace spectral_econ
