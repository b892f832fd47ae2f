#pragma once

#include "spectral_econ/json_format.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spectral_econ::market {

/// Pricing game with demand q(x) = q0 + M x, M symmetric with M_ii = -1.
struct MarketScenario {
    SquareMatrix m;
    Vector q0;
    double noise_sd = 1.0;       // sd of the symmetric matrix noise E
    double q0_noise_sd = 0.0;    // sd of the quantity noise z
    std::uint64_t seed = 0;
};

struct NoisyObservation {
    SquareMatrix m_hat;  // M + E
    Vector q0_hat;       // q0 + z
    double noise_sd = 0.0;
};

/// Symmetric eigendecomposition ordered by decreasing |lambda|.
struct Spectrum {
    Vector values;
    Matrix vectors;  // columns w^l
};

struct SpectralWelfare {
    double value = 0.0;
    Vector terms;  // alpha_l beta_l lambda_l / (1 - lambda_l), in Spectrum order
};

struct RecoverableStructure {
    bool holds = false;
    double projection_norm = 0.0;
    std::size_t dimension = 0;
};

struct DesignOptions {
    double tau = 0.0;             // |lambda_hat| threshold
    double target = 1.0;
    double margin = 2.0;
    double structure_floor = 1e-8;  // relative to ||q0_hat||^2
};

struct InterventionReport {
    Vector sigma;
    double estimated_welfare = 0.0;
    std::optional<double> true_welfare;
    std::size_t top_space_dim = 0;
    std::optional<double> alignment;  // |<w^1, w_hat^1>|
    Vector top_eigenvector_hat;
};

struct ReplicateRecord {
    std::size_t replicate = 0;
    bool designed = false;
    double true_welfare = 0.0;
    double alignment = 0.0;
    double noise_norm = 0.0;
    double sin_theta = 0.0;
    double davis_kahan_bound = 1.0;
};

struct CertificationReport {
    double success_rate = 0.0;
    double mean_alignment = 0.0;
    double min_alignment = 0.0;
    double davis_kahan_bound = 1.0;  // worst replicate
    double eigengap = 0.0;
    double epsilon = 0.0;
    bool certified = false;          // success_rate >= 1 - epsilon
    std::vector<ReplicateRecord> replicates;
};

void validate(const MarketScenario& scenario);

Spectrum symmetric_spectrum(const SquareMatrix& m);

/// x_dot = (I - M)^-1 c_dot
Vector price_response(const MarketScenario& scenario, const Vector& c_dot);

/// V(sigma) = q0^T (I - M)^-1 M sigma
double welfare_effect(const MarketScenario& scenario, const Vector& sigma);

SpectralWelfare spectral_welfare(const MarketScenario& scenario, const Vector& sigma);

/// Deterministic in (scenario.seed, replicate).
NoisyObservation observe(const MarketScenario& scenario, std::size_t replicate = 0);

RecoverableStructure recoverable_structure(const MarketScenario& scenario, double mu, double delta);

/// Threshold above the Wigner edge: 2.5 * noise_sd * sqrt(n).
double default_tau(double noise_sd, std::size_t n);

/// Uses only the hatted quantities. Throws NoRecoverableStructure when no
/// eigenspace with |lambda_hat| >= tau carries enough of q0_hat.
InterventionReport design_intervention(const NoisyObservation& obs, const DesignOptions& options);

/// Fills true_welfare and alignment against the simulated truth.
void evaluate(const MarketScenario& scenario, InterventionReport& report);

CertificationReport certify(const MarketScenario& scenario, const DesignOptions& options,
                            std::size_t replicates, double epsilon, int threads = 1);

/// C (x) J_{n/3} with the three-group demand matrix C; q0 = w^1 + 0.1 * 1.
MarketScenario block_example(std::size_t n);
SquareMatrix block_matrix(std::size_t n);

MarketScenario scenario_from_json(const Json& j);
Json to_json(const InterventionReport& report);
InterventionReport intervention_report_from_json(const Json& j);
Json to_json(const CertificationReport& report);
CertificationReport certification_report_from_json(const Json& j);

/// node,sigma rows (1-based nodes).
std::string to_csv(const InterventionReport& report);
/// One row per replicate.
std::string to_csv(const CertificationReport& report);

}  // namespace spectral_econ::market
