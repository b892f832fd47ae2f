#pragma once

#include "spectral_econ/centrality.hpp"
#include "spectral_econ/json_format.hpp"
#include "spectral_econ/random.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spectral_econ::degroot {

inline constexpr double kRowSumTolerance = 1e-12;

/// Row-stochastic matrix: nonnegative entries, each row summing to 1.
class StochasticMatrix {
public:
    explicit StochasticMatrix(SquareMatrix base);

    /// Divides each row by its sum. Rows must have positive sums.
    static StochasticMatrix normalize_rows(const SquareMatrix& weights);

    [[nodiscard]] const SquareMatrix& base() const noexcept { return base_; }
    [[nodiscard]] std::size_t size() const noexcept { return base_.size(); }
    [[nodiscard]] const Matrix& entries() const noexcept { return base_.entries(); }

private:
    SquareMatrix base_;
};

struct OpinionSnapshot {
    long t = 0;
    Matrix state;  // n x d
};

struct OpinionTrajectory {
    std::vector<OpinionSnapshot> states;  // t = 0, every stride-th step, and the final step
    bool converged = false;
    long steps = 0;
    std::optional<Vector> consensus;  // length d
};

struct SimulateOptions {
    long t_max = 100000;
    double tol = 1e-9;
    long stride = 1;
};

struct MatrixSequence {
    std::vector<StochasticMatrix> matrices;
    std::string description;
};

struct WisdomPoint {
    std::size_t n = 0;
    double max_influence = 0.0;
};

struct CrowdWisdomResult {
    double consensus_sd = 0.0;
    double theoretical_sd = 0.0;
    int replicates = 0;
};

// Draws one initial opinion; defaults to normal(mu, sd^2).
using OpinionSampler = std::function<double(Rng&, double mu, double sd)>;

/// Iterates x(t+1) = M x(t) until the opinion range across agents is within
/// tol in every dimension, or until t_max. Periodic chains report
/// converged = false rather than failing.
OpinionTrajectory simulate(const StochasticMatrix& m, const Matrix& x0,
                           const SimulateOptions& options = {});

/// c^T x(0) for the left Perron vector c. Requires a strongly connected,
/// aperiodic digraph.
Vector consensus_value(const StochasticMatrix& m, const Matrix& x0);

CentralityResult influence_weights(const StochasticMatrix& m);

/// Smallest t <= t_max at which every outside agent j puts total weight
/// sum_{i in p} (M^t)_{ji} >= epsilon on the set `p`; empty when no such t
/// exists in range.
std::optional<long> prominence_check(const StochasticMatrix& m, const std::vector<std::size_t>& p,
                                     double epsilon, long t_max);

std::vector<WisdomPoint> wisdom_trend(const MatrixSequence& sequence, int threads = 1);

CrowdWisdomResult crowd_wisdom_experiment(const StochasticMatrix& m, double mu, double noise_sd,
                                          int replicates, std::uint64_t seed, int threads = 1,
                                          const OpinionSampler& sampler = {});

// Generators for growing-population experiments.
StochasticMatrix uniform_matrix(std::size_t n);

/// Everyone, the celebrity (node 0) included, puts `celebrity_weight` on
/// node 0 and spreads the rest uniformly over all n agents.
StochasticMatrix celebrity_matrix(std::size_t n, double celebrity_weight = 0.5);

/// Row-normalized undirected G(n, p) graph with self-loops, redrawn until
/// connected. Deterministic in (seed, n).
StochasticMatrix erdos_renyi_matrix(std::size_t n, double p, std::uint64_t seed);

MatrixSequence uniform_sequence(const std::vector<std::size_t>& sizes);
MatrixSequence celebrity_sequence(const std::vector<std::size_t>& sizes,
                                  double celebrity_weight = 0.5);
MatrixSequence erdos_renyi_sequence(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                                    double edge_factor = 3.0);

Json to_json(const OpinionTrajectory& trajectory);
std::string trajectory_to_csv(const OpinionTrajectory& trajectory);

}  // namespace spectral_econ::degroot
