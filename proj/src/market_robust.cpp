#include "spectral_econ/market_robust.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_io.hpp"
#include "spectral_econ/parallel.hpp"
#include "spectral_econ/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spectral_econ::market {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kUnitEigenvalueGuard = 1e-9;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector solve_shifted(const SquareMatrix& m, const Vector& rhs) {
    const auto n = idx(m.size());
    if (rhs.size() != n) throw InvalidInput("vector length does not match the market size");
    const Matrix system = Matrix::Identity(n, n) - m.entries();
    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible()) throw NumericFailure("I - M is singular");
    Vector x = lu.solve(rhs);
    if (!x.allFinite()) throw NumericFailure("solve with I - M produced non-finite values");
    return x;
}

double top_eigengap(const Spectrum& s) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 1; l < s.values.size(); ++l) {
        gap = std::min(gap, std::abs(s.values[0] - s.values[l]));
    }
    return std::isfinite(gap) ? gap : 0.0;
}

double spectral_norm_symmetric(const Matrix& e) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericFailure("noise eigensolver failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

void validate(const MarketScenario& scenario) {
    const auto& m = scenario.m;
    const auto n = idx(m.size());
    if (n == 0) throw InvalidInput("market must have at least one firm");
    if (!(m.entries().diagonal().array() == -1.0).all()) {
        throw InvalidInput("market matrix must satisfy the normalization M_ii = -1");
    }
    if (!m.is_symmetric(kSymmetryTolerance)) throw InvalidInput("market matrix must be symmetric");
    if (scenario.q0.size() != n || !scenario.q0.allFinite()) {
        throw InvalidInput(fmt::format("q0 must be a finite vector of length {}", n));
    }
    if (!(scenario.noise_sd >= 0.0) || !(scenario.q0_noise_sd >= 0.0)) {
        throw InvalidInput("noise standard deviations must be nonnegative");
    }
    const Spectrum s = symmetric_spectrum(m);
    for (Eigen::Index l = 0; l < s.values.size(); ++l) {
        if (std::abs(s.values[l] - 1.0) <= kUnitEigenvalueGuard) {
            throw PreconditionViolation(
                fmt::format("M has eigenvalue {} within 1e-9 of 1; I - M is singular", s.values[l]));
        }
    }
}

Spectrum symmetric_spectrum(const SquareMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.entries());
    if (solver.info() != Eigen::Success) throw NumericFailure("symmetric eigensolver failed");
    const auto n = solver.eigenvalues().size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(solver.eigenvalues()[a]) > std::abs(solver.eigenvalues()[b]);
    });
    Spectrum s{Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        s.values[k] = solver.eigenvalues()[src];
        Vector w = solver.eigenvectors().col(src);
        if (w.sum() < 0.0) w = -w;
        s.vectors.col(k) = w;
    }
    return s;
}

Vector price_response(const MarketScenario& scenario, const Vector& c_dot) {
    return solve_shifted(scenario.m, c_dot);
}

double welfare_effect(const MarketScenario& scenario, const Vector& sigma) {
    return scenario.q0.dot(solve_shifted(scenario.m, scenario.m.entries() * sigma));
}

SpectralWelfare spectral_welfare(const MarketScenario& scenario, const Vector& sigma) {
    if (!scenario.m.is_symmetric(kSymmetryTolerance)) {
        throw PreconditionViolation("spectral_welfare requires a symmetric M");
    }
    if (sigma.size() != idx(scenario.m.size()) || scenario.q0.size() != sigma.size()) {
        throw InvalidInput("spectral_welfare: vector length does not match the market size");
    }
    const Spectrum s = symmetric_spectrum(scenario.m);
    const Vector alpha = s.vectors.transpose() * sigma;
    const Vector beta = s.vectors.transpose() * scenario.q0;
    SpectralWelfare out{0.0, Vector(s.values.size())};
    for (Eigen::Index l = 0; l < s.values.size(); ++l) {
        const double lambda = s.values[l];
        if (std::abs(1.0 - lambda) <= kUnitEigenvalueGuard) {
            throw NumericFailure(fmt::format("eigenvalue {} is within 1e-9 of 1", lambda));
        }
        out.terms[l] = alpha[l] * beta[l] * lambda / (1.0 - lambda);
    }
    out.value = out.terms.sum();
    return out;
}

NoisyObservation observe(const MarketScenario& scenario, std::size_t replicate) {
    const auto n = idx(scenario.m.size());
    Rng rng = replicate_rng(scenario.seed, replicate);
    Matrix m = scenario.m.entries();
    if (scenario.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, scenario.noise_sd);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double e = noise(rng);
                m(i, j) += e;
                if (j != i) m(j, i) += e;
            }
        }
    }
    Vector q = scenario.q0;
    if (scenario.q0_noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, scenario.q0_noise_sd);
        for (Eigen::Index i = 0; i < n; ++i) q[i] += noise(rng);
    }
    return {SquareMatrix(std::move(m)), std::move(q), scenario.noise_sd};
}

RecoverableStructure recoverable_structure(const MarketScenario& scenario, double mu, double delta) {
    if (!scenario.m.is_symmetric(kSymmetryTolerance)) {
        throw PreconditionViolation("recoverable_structure requires a symmetric M");
    }
    const Spectrum s = symmetric_spectrum(scenario.m);
    RecoverableStructure out;
    double sq = 0.0;
    for (Eigen::Index l = 0; l < s.values.size(); ++l) {
        if (std::abs(s.values[l]) < mu) continue;
        const double beta = s.vectors.col(l).dot(scenario.q0);
        sq += beta * beta;
        ++out.dimension;
    }
    out.projection_norm = std::sqrt(sq);
    out.holds = out.projection_norm >= delta;
    return out;
}

double default_tau(double noise_sd, std::size_t n) {
    return 2.5 * noise_sd * std::sqrt(static_cast<double>(n));
}

InterventionReport design_intervention(const NoisyObservation& obs, const DesignOptions& options) {
    if (!(options.tau > 0.0)) throw InvalidInput("design_intervention: tau must be positive");
    if (!(options.target > 0.0)) throw InvalidInput("design_intervention: target must be positive");
    if (!(options.margin > 0.0)) throw InvalidInput("design_intervention: margin must be positive");
    if (obs.q0_hat.size() != idx(obs.m_hat.size())) {
        throw InvalidInput("design_intervention: q0_hat has the wrong length");
    }
    const Spectrum s = symmetric_spectrum(obs.m_hat);
    const Vector beta = s.vectors.transpose() * obs.q0_hat;

    std::vector<Eigen::Index> selected;
    double strength = 0.0;
    for (Eigen::Index l = 0; l < s.values.size(); ++l) {
        const double lambda = s.values[l];
        if (std::abs(lambda) < options.tau) continue;
        if (std::abs(1.0 - lambda) <= kUnitEigenvalueGuard) {
            throw NumericFailure(fmt::format("observed eigenvalue {} is within 1e-9 of 1", lambda));
        }
        selected.push_back(l);
        strength += beta[l] * beta[l] * std::abs(lambda / (1.0 - lambda));
    }
    const double floor = options.structure_floor * obs.q0_hat.squaredNorm();
    if (selected.empty() || !(strength > floor)) {
        throw NoRecoverableStructure(fmt::format(
            "no recoverable structure: {} eigenvalues with |lambda| >= {} carry spectral weight {} "
            "(floor {})",
            selected.size(), options.tau, strength, floor));
    }

    const double scale = options.margin * options.target / strength;
    InterventionReport report;
    report.sigma = Vector::Zero(s.values.size());
    for (Eigen::Index l : selected) {
        const double lambda = s.values[l];
        const double sign = lambda / (1.0 - lambda) >= 0.0 ? 1.0 : -1.0;
        const double alpha = scale * beta[l] * sign;
        report.sigma += alpha * s.vectors.col(l);
        report.estimated_welfare += alpha * beta[l] * lambda / (1.0 - lambda);
    }
    report.top_space_dim = selected.size();
    report.top_eigenvector_hat = s.vectors.col(0);
    return report;
}

void evaluate(const MarketScenario& scenario, InterventionReport& report) {
    report.true_welfare = welfare_effect(scenario, report.sigma);
    const Spectrum truth = symmetric_spectrum(scenario.m);
    report.alignment = std::abs(truth.vectors.col(0).dot(report.top_eigenvector_hat));
}

CertificationReport certify(const MarketScenario& scenario, const DesignOptions& options,
                            std::size_t replicates, double epsilon, int threads) {
    validate(scenario);
    if (replicates < 1) throw InvalidInput("certify: replicates must be >= 1");
    const Spectrum truth = symmetric_spectrum(scenario.m);
    const Vector w1 = truth.vectors.col(0);
    CertificationReport report;
    report.eigengap = top_eigengap(truth);
    report.epsilon = epsilon;
    report.replicates.resize(replicates);

    parallel_for(replicates, threads, [&](std::size_t r) {
        ReplicateRecord rec;
        rec.replicate = r;
        const NoisyObservation obs = observe(scenario, r);
        rec.noise_norm = spectral_norm_symmetric(obs.m_hat.entries() - scenario.m.entries());
        rec.davis_kahan_bound =
            rec.noise_norm < report.eigengap
                ? std::min(1.0, rec.noise_norm / (report.eigengap - rec.noise_norm))
                : 1.0;
        try {
            const InterventionReport design = design_intervention(obs, options);
            rec.designed = true;
            rec.true_welfare = welfare_effect(scenario, design.sigma);
            rec.alignment = std::min(1.0, std::abs(w1.dot(design.top_eigenvector_hat)));
        } catch (const NoRecoverableStructure&) {
            rec.designed = false;
            rec.alignment = std::min(1.0, std::abs(w1.dot(symmetric_spectrum(obs.m_hat).vectors.col(0))));
        }
        rec.sin_theta = std::sqrt(std::max(0.0, 1.0 - rec.alignment * rec.alignment));
        report.replicates[r] = rec;
    });

    std::size_t successes = 0;
    double total_alignment = 0.0;
    report.min_alignment = 1.0;
    report.davis_kahan_bound = 0.0;
    for (const auto& rec : report.replicates) {
        if (rec.designed && rec.true_welfare >= options.target) ++successes;
        total_alignment += rec.alignment;
        report.min_alignment = std::min(report.min_alignment, rec.alignment);
        report.davis_kahan_bound = std::max(report.davis_kahan_bound, rec.davis_kahan_bound);
    }
    report.success_rate = static_cast<double>(successes) / static_cast<double>(replicates);
    report.mean_alignment = total_alignment / static_cast<double>(replicates);
    report.certified = report.success_rate >= 1.0 - epsilon;
    return report;
}

SquareMatrix block_matrix(std::size_t n) {
    if (n == 0 || n % 3 != 0) {
        throw InvalidInput(fmt::format("block example needs n divisible by 3, got {}", n));
    }
    Matrix c(3, 3);
    c << -1.0, 0.15, 0.7,
         0.15, -1.0, 0.6,
         0.7, 0.6, -1.0;
    const auto k = idx(n / 3);
    Matrix m(idx(n), idx(n));
    for (Eigen::Index a = 0; a < 3; ++a) {
        for (Eigen::Index b = 0; b < 3; ++b) m.block(a * k, b * k, k, k).setConstant(c(a, b));
    }
    m.diagonal().setConstant(-1.0);
    return SquareMatrix(std::move(m));
}

MarketScenario block_example(std::size_t n) {
    MarketScenario scenario;
    scenario.m = block_matrix(n);
    const Spectrum s = symmetric_spectrum(scenario.m);
    scenario.q0 = s.vectors.col(0) + Vector::Constant(idx(n), 0.1);
    scenario.noise_sd = 1.0;
    scenario.q0_noise_sd = 0.0;
    scenario.seed = 0;
    return scenario;
}

MarketScenario scenario_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInput("market scenario must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "m" && k != "q0" && k != "noise_sd" && k != "q0_noise_sd" && k != "seed") {
            throw InvalidInput(fmt::format("unknown key '{}' in market scenario", k));
        }
    }
    if (!j.contains("m")) throw InvalidInput("market scenario needs 'm'");
    MarketScenario scenario;
    try {
        const auto& mj = j["m"];
        bool is_block = mj.is_object() && mj.contains("block");
        if (is_block) {
            const auto n = mj["block"].at("n").get<std::size_t>();
            scenario = block_example(n);
        } else {
            scenario.m = io::matrix_from_json(mj);
        }
        const Spectrum s = symmetric_spectrum(scenario.m);
        if (j.contains("q0")) {
            if (j["q0"].is_string()) {
                if (j["q0"].get<std::string>() != "top_eigenvector") {
                    throw InvalidInput("q0 must be an array or \"top_eigenvector\"");
                }
                scenario.q0 = s.vectors.col(0);
            } else {
                scenario.q0 = vector_from_json(j["q0"], "q0");
            }
        } else if (!is_block) {
            throw InvalidInput("market scenario needs 'q0' unless 'm' is a block example");
        }
        scenario.noise_sd = j.value("noise_sd", 1.0);
        scenario.q0_noise_sd = j.value("q0_noise_sd", 0.0);
        scenario.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed market scenario: {}", e.what()));
    }
    validate(scenario);
    return scenario;
}

Json to_json(const InterventionReport& report) {
    Json j;
    j["sigma"] = vector_to_json(report.sigma);
    j["estimated_welfare"] = report.estimated_welfare;
    j["true_welfare"] = report.true_welfare ? Json(*report.true_welfare) : Json(nullptr);
    j["top_space_dim"] = report.top_space_dim;
    j["alignment"] = report.alignment ? Json(*report.alignment) : Json(nullptr);
    j["top_eigenvector_hat"] = vector_to_json(report.top_eigenvector_hat);
    return j;
}

InterventionReport intervention_report_from_json(const Json& j) {
    InterventionReport r;
    try {
        r.sigma = vector_from_json(j.at("sigma"), "sigma");
        r.estimated_welfare = j.at("estimated_welfare").get<double>();
        if (!j.at("true_welfare").is_null()) r.true_welfare = j["true_welfare"].get<double>();
        r.top_space_dim = j.at("top_space_dim").get<std::size_t>();
        if (!j.at("alignment").is_null()) r.alignment = j["alignment"].get<double>();
        r.top_eigenvector_hat = vector_from_json(j.at("top_eigenvector_hat"), "top_eigenvector_hat");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed intervention report: {}", e.what()));
    }
    return r;
}

Json to_json(const CertificationReport& report) {
    Json j;
    j["success_rate"] = report.success_rate;
    j["mean_alignment"] = report.mean_alignment;
    j["min_alignment"] = report.min_alignment;
    j["davis_kahan_bound"] = report.davis_kahan_bound;
    j["eigengap"] = report.eigengap;
    j["epsilon"] = report.epsilon;
    j["certified"] = report.certified;
    Json reps = Json::array();
    for (const auto& r : report.replicates) {
        reps.push_back({{"replicate", r.replicate},
                        {"designed", r.designed},
                        {"true_welfare", r.true_welfare},
                        {"alignment", r.alignment},
                        {"noise_norm", r.noise_norm},
                        {"sin_theta", r.sin_theta},
                        {"davis_kahan_bound", r.davis_kahan_bound}});
    }
    j["replicates"] = std::move(reps);
    return j;
}

CertificationReport certification_report_from_json(const Json& j) {
    CertificationReport r;
    try {
        r.success_rate = j.at("success_rate").get<double>();
        r.mean_alignment = j.at("mean_alignment").get<double>();
        r.min_alignment = j.at("min_alignment").get<double>();
        r.davis_kahan_bound = j.at("davis_kahan_bound").get<double>();
        r.eigengap = j.at("eigengap").get<double>();
        r.epsilon = j.at("epsilon").get<double>();
        r.certified = j.at("certified").get<bool>();
        for (const auto& rec : j.at("replicates")) {
            r.replicates.push_back({rec.at("replicate").get<std::size_t>(),
                                    rec.at("designed").get<bool>(),
                                    rec.at("true_welfare").get<double>(),
                                    rec.at("alignment").get<double>(),
                                    rec.at("noise_norm").get<double>(),
                                    rec.at("sin_theta").get<double>(),
                                    rec.at("davis_kahan_bound").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed certification report: {}", e.what()));
    }
    return r;
}

std::string to_csv(const InterventionReport& report) {
    std::string out = "node,sigma\n";
    for (Eigen::Index i = 0; i < report.sigma.size(); ++i) {
        out += fmt::format("{},{}\n", i + 1, format_double(report.sigma[i]));
    }
    return out;
}

std::string to_csv(const CertificationReport& report) {
    std::string out = "replicate,designed,true_welfare,alignment,noise_norm,sin_theta,davis_kahan_bound\n";
    for (const auto& r : report.replicates) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.replicate, r.designed ? 1 : 0,
                           format_double(r.true_welfare), format_double(r.alignment),
                           format_double(r.noise_norm), format_double(r.sin_theta),
                           format_double(r.davis_kahan_bound));
    }
    return out;
}

}  // namespace spectral_econ::market
