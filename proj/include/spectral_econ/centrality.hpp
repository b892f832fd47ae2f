#pragma once

#include "spectral_econ/json_format.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spectral_econ {

enum class CentralityKind { degree, eigenvector, katz_bonacich };
enum class DegreeDirection { in, out, undirected };

// Katz-Bonacich uses k^T = delta k^T M + z^T on M as given, or on M^T.
enum class Orientation { as_given, transposed };

struct KatzParams {
    double delta = 0.0;
    Vector z;
};

struct CentralityResult {
    Vector scores;
    CentralityKind kind = CentralityKind::degree;
    std::string normalization;  // "sum-1" or "raw"
    std::optional<KatzParams> params;
    std::vector<std::string> labels;
};

struct KbLimitPoint {
    double delta = 0.0;
    Vector rescaled;  // sum-normalized (1 - delta) k(delta)
    double cosine_to_eigenvector = 0.0;
};

CentralityResult degree_centrality(const SquareMatrix& m, DegreeDirection direction);

/// Left Perron vector of an irreducible nonnegative matrix, summing to 1.
/// Satisfies lambda c_i = sum_j c_j m_ji.
CentralityResult eigenvector_centrality(const SquareMatrix& m);

/// (delta, z) Katz-Bonacich centrality. Requires 0 <= delta < 1 / rho(M).
CentralityResult katz_bonacich(const SquareMatrix& m, double delta, const Vector& z,
                               Orientation orientation = Orientation::as_given);

/// Katz-Bonacich with the all-ones exogenous vector.
CentralityResult katz_bonacich(const SquareMatrix& m, double delta);

std::vector<KbLimitPoint> kb_eigenvector_limit(const SquareMatrix& m, const Vector& z,
                                               const std::vector<double>& deltas);

const char* to_string(CentralityKind kind);
CentralityKind centrality_kind_from_string(const std::string& s);

Json to_json(const CentralityResult& result);
CentralityResult centrality_from_json(const Json& j);
std::string to_csv(const CentralityResult& result);

}  // namespace spectral_econ
