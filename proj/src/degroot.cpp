#include "spectral_econ/degroot.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "spectral_econ/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace spectral_econ::degroot {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double consensus_deviation(const Matrix& x) {
    if (x.rows() == 0) return 0.0;
    const Eigen::RowVectorXd mean = x.colwise().mean();
    return (x.rowwise() - mean).cwiseAbs().maxCoeff();
}

}  // namespace

StochasticMatrix::StochasticMatrix(SquareMatrix base) : base_(std::move(base)) {
    require_nonnegative(base_, "stochastic matrix");
    for (std::size_t i = 0; i < base_.size(); ++i) {
        const double s = base_.entries().row(idx(i)).sum();
        if (std::abs(s - 1.0) > kRowSumTolerance) {
            throw InvalidInput(fmt::format("row {} of a stochastic matrix sums to {}", i, s));
        }
    }
}

StochasticMatrix StochasticMatrix::normalize_rows(const SquareMatrix& weights) {
    require_nonnegative(weights, "normalize_rows");
    Matrix m = weights.entries();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double s = m.row(i).sum();
        if (!(s > 0.0)) throw InvalidInput(fmt::format("row {} has no positive weight", i));
        m.row(i) /= s;
    }
    return StochasticMatrix(SquareMatrix(std::move(m), weights.labels()));
}

OpinionTrajectory simulate(const StochasticMatrix& m, const Matrix& x0,
                           const SimulateOptions& options) {
    if (x0.rows() != idx(m.size())) {
        throw InvalidInput(fmt::format("initial opinions have {} rows for {} agents", x0.rows(),
                                       m.size()));
    }
    if (options.t_max < 0 || !(options.tol > 0.0) || options.stride < 1) {
        throw InvalidInput("simulate: need t_max >= 0, tol > 0, stride >= 1");
    }
    OpinionTrajectory trajectory;
    Matrix x = x0;
    trajectory.states.push_back({0, x});
    long t = 0;
    bool converged = consensus_deviation(x) <= options.tol;
    while (!converged && t < options.t_max) {
        x = m.entries() * x;
        ++t;
        converged = consensus_deviation(x) <= options.tol;
        if (t % options.stride == 0) trajectory.states.push_back({t, x});
    }
    if (trajectory.states.back().t != t) trajectory.states.push_back({t, x});
    trajectory.steps = t;
    trajectory.converged = converged;
    if (converged) trajectory.consensus = Vector(x.colwise().mean().transpose());
    return trajectory;
}

Vector consensus_value(const StochasticMatrix& m, const Matrix& x0) {
    if (x0.rows() != idx(m.size())) {
        throw InvalidInput("consensus_value: initial opinions have the wrong number of rows");
    }
    if (!is_irreducible(m.base())) {
        throw PreconditionViolation(
            "consensus requires a strongly connected digraph; the matrix is reducible");
    }
    if (!is_aperiodic(m.base())) {
        throw PreconditionViolation(fmt::format(
            "consensus requires an aperiodic digraph; the period is {}", period(m.base())));
    }
    if (m.size() == 1) return x0.row(0).transpose();
    const Vector c = perron_pair(m.base()).left;
    return x0.transpose() * c;
}

CentralityResult influence_weights(const StochasticMatrix& m) {
    return eigenvector_centrality(m.base());
}

std::optional<long> prominence_check(const StochasticMatrix& m, const std::vector<std::size_t>& p,
                                     double epsilon, long t_max) {
    const std::size_t n = m.size();
    std::vector<bool> in_set(n, false);
    for (std::size_t i : p) {
        if (i >= n) throw InvalidInput(fmt::format("prominence set index {} out of range", i));
        if (in_set[i]) throw InvalidInput(fmt::format("prominence set repeats index {}", i));
        in_set[i] = true;
    }
    if (p.empty() || p.size() >= n) {
        throw InvalidInput("prominence set must be a nonempty proper subset of agents");
    }
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw InvalidInput("prominence threshold epsilon must lie in (0, 1]");
    }
    if (t_max < 1) throw InvalidInput("prominence_check: t_max must be >= 1");

    Matrix power = m.entries();
    for (long t = 1; t <= t_max; ++t) {
        if (t > 1) power = power * m.entries();
        bool prominent = true;
        for (std::size_t j = 0; j < n && prominent; ++j) {
            if (in_set[j]) continue;
            double weight = 0.0;
            for (std::size_t i : p) weight += power(idx(j), idx(i));  // j's t-step weight on the set
            prominent = weight >= epsilon;
        }
        if (prominent) return t;
    }
    return std::nullopt;
}

std::vector<WisdomPoint> wisdom_trend(const MatrixSequence& sequence, int threads) {
    std::vector<WisdomPoint> points(sequence.matrices.size());
    parallel_for(points.size(), threads, [&](std::size_t k) {
        const auto& m = sequence.matrices[k];
        points[k] = {m.size(), influence_weights(m).scores.maxCoeff()};
    });
    return points;
}

CrowdWisdomResult crowd_wisdom_experiment(const StochasticMatrix& m, double mu, double noise_sd,
                                          int replicates, std::uint64_t seed, int threads,
                                          const OpinionSampler& sampler) {
    if (replicates < 1) throw InvalidInput("crowd_wisdom_experiment: replicates must be >= 1");
    if (!(noise_sd > 0.0)) throw InvalidInput("crowd_wisdom_experiment: noise_sd must be > 0");
    if (!is_primitive(m.base())) {
        throw PreconditionViolation("crowd_wisdom_experiment requires a primitive matrix");
    }
    const Vector c = influence_weights(m).scores;
    const OpinionSampler draw = sampler ? sampler : [](Rng& rng, double mean, double sd) {
        return std::normal_distribution<double>(mean, sd)(rng);
    };

    std::vector<double> consensus(static_cast<std::size_t>(replicates));
    parallel_for(consensus.size(), threads, [&](std::size_t r) {
        Rng rng = replicate_rng(seed, r);
        double a = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) a += c[i] * draw(rng, mu, noise_sd);
        consensus[r] = a;
    });

    double mean = 0.0;
    for (double a : consensus) mean += a;
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (double a : consensus) ss += (a - mean) * (a - mean);

    CrowdWisdomResult result;
    result.replicates = replicates;
    result.consensus_sd = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
    result.theoretical_sd = noise_sd * c.norm();
    return result;
}

StochasticMatrix uniform_matrix(std::size_t n) {
    if (n == 0) throw InvalidInput("uniform_matrix: n must be positive");
    const double w = 1.0 / static_cast<double>(n);
    return StochasticMatrix(SquareMatrix(Matrix::Constant(idx(n), idx(n), w)));
}

StochasticMatrix celebrity_matrix(std::size_t n, double celebrity_weight) {
    if (n < 2) throw InvalidInput("celebrity_matrix: n must be >= 2");
    if (!(celebrity_weight > 0.0 && celebrity_weight < 1.0)) {
        throw InvalidInput("celebrity_matrix: weight must lie in (0, 1)");
    }
    Matrix m = Matrix::Constant(idx(n), idx(n), (1.0 - celebrity_weight) / static_cast<double>(n));
    m.col(0).array() += celebrity_weight;
    return StochasticMatrix::normalize_rows(SquareMatrix(std::move(m)));
}

StochasticMatrix erdos_renyi_matrix(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("erdos_renyi_matrix: n must be >= 2");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("erdos_renyi_matrix: p must lie in (0, 1]");
    Rng rng = replicate_rng(seed, n);
    std::bernoulli_distribution coin(p);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Matrix a = Matrix::Identity(idx(n), idx(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (coin(rng)) a(idx(i), idx(j)) = a(idx(j), idx(i)) = 1.0;
            }
        }
        SquareMatrix graph(std::move(a));
        if (is_irreducible(graph)) return StochasticMatrix::normalize_rows(graph);
    }
    throw NumericFailure(fmt::format("no connected G({}, {}) draw in 1000 attempts", n, p));
}

MatrixSequence uniform_sequence(const std::vector<std::size_t>& sizes) {
    MatrixSequence seq{{}, "uniform averaging, M_ij = 1/n"};
    for (std::size_t n : sizes) seq.matrices.push_back(uniform_matrix(n));
    return seq;
}

MatrixSequence celebrity_sequence(const std::vector<std::size_t>& sizes, double celebrity_weight) {
    MatrixSequence seq{{}, fmt::format("celebrity at node 0 with weight {}", celebrity_weight)};
    for (std::size_t n : sizes) seq.matrices.push_back(celebrity_matrix(n, celebrity_weight));
    return seq;
}

MatrixSequence erdos_renyi_sequence(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                                    double edge_factor) {
    MatrixSequence seq{{}, fmt::format("row-normalized G(n, {} log(n)/n), seed {}", edge_factor,
                                       seed)};
    for (std::size_t n : sizes) {
        const double p = std::min(1.0, edge_factor * std::log(static_cast<double>(n)) /
                                           static_cast<double>(n));
        seq.matrices.push_back(erdos_renyi_matrix(n, p, seed));
    }
    return seq;
}

Json to_json(const OpinionTrajectory& trajectory) {
    Json j;
    j["converged"] = trajectory.converged;
    j["steps"] = trajectory.steps;
    j["consensus"] = trajectory.consensus ? vector_to_json(*trajectory.consensus) : Json(nullptr);
    Json states = Json::array();
    for (const auto& s : trajectory.states) {
        states.push_back({{"t", s.t}, {"state", matrix_rows_to_json(s.state)}});
    }
    j["states"] = std::move(states);
    return j;
}

std::string trajectory_to_csv(const OpinionTrajectory& trajectory) {
    std::string out = "t,node,dim,value\n";
    for (const auto& s : trajectory.states) {
        for (Eigen::Index i = 0; i < s.state.rows(); ++i) {
            for (Eigen::Index d = 0; d < s.state.cols(); ++d) {
                out += fmt::format("{},{},{},{}\n", s.t, i + 1, d + 1, format_double(s.state(i, d)));
            }
        }
    }
    return out;
}

}  // namespace spectral_econ::degroot
