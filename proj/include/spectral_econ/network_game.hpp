#pragma once

#include "spectral_econ/json_format.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spectral_econ::game {

/// u_i(x) = -1/2 gamma_i x_i^2 + (beta_i + sum_{j != i} g_ij x_j) x_i
struct GameSpec {
    Vector gamma;
    Vector beta;
    SquareMatrix g;
};

/// Payoffs divided by gamma_i: b_i = beta_i / gamma_i, m_ij = g_ij / gamma_i.
struct NormalizedGame {
    Vector b;
    SquareMatrix m;
    double rho = 0.0;
    bool uniform_gamma = true;
};

struct BestResponseTrace {
    std::vector<Vector> trajectory;  // x(0), x(1), ...
    bool converged = false;
    bool diverging = false;
};

enum class PoaMode { closed_form, empirical };

struct PoaResult {
    double value = 0.0;
    PoaMode mode = PoaMode::closed_form;
    std::optional<Vector> maximizer;  // unit-norm b attaining the empirical value
    int starts = 0;
};

struct PoaSearchOptions {
    int starts = 32;
    int max_iterations = 2000;
    double tol = 1e-13;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct EquilibriumReport {
    Vector x_star;
    double welfare_nash = 0.0;
    std::optional<Vector> x_eff;
    std::optional<double> welfare_eff;
    Vector keyness;
    std::optional<double> poa_closed_form;
    std::vector<std::string> warnings;
};

void validate(const GameSpec& spec);
NormalizedGame normalize(const GameSpec& spec);

/// Builds a game already in normalized form (gamma = 1, beta = b, g = m).
NormalizedGame normalized_from(const Vector& b, const SquareMatrix& m);

/// x* = (I - M)^-1 b. Requires rho(M) < 1. Negative components are reported
/// through `warnings` (when given) and returned unconstrained.
Vector nash_equilibrium(const NormalizedGame& game, std::vector<std::string>* warnings = nullptr);

/// Iterates x(t+1) = b + M x(t) until successive iterates agree to tol.
BestResponseTrace best_response_dynamics(const NormalizedGame& game, const Vector& x0, int t_max,
                                         double tol);

/// kappa^T = 1^T (I - M)^-1, the slope of total equilibrium effort in b.
Vector keyness(const NormalizedGame& game);

/// V(x) = sum_i [-1/2 x_i^2 + (b_i + sum_j m_ij x_j) x_i]. Requires uniform gamma.
double total_welfare(const NormalizedGame& game, const Vector& x);

/// Maximizer of V: (I - 2M)^-1 b. Requires symmetric M and 2 rho(M) < 1.
Vector efficient_profile(const NormalizedGame& game);

PoaResult price_of_anarchy(const NormalizedGame& game, PoaMode mode,
                           const PoaSearchOptions& options = {});

/// V(x_eff(b)) / V(x*(b)) for a given b.
double welfare_ratio(const NormalizedGame& game, const Vector& b);

EquilibriumReport analyze(const NormalizedGame& game);

GameSpec game_spec_from_json(const Json& j);
Json to_json(const GameSpec& spec);
Json to_json(const EquilibriumReport& report);
EquilibriumReport equilibrium_report_from_json(const Json& j);
Json to_json(const PoaResult& result);

}  // namespace spectral_econ::game
