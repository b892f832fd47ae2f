#include "spectral_econ/network_game.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "spectral_econ/matrix_io.hpp"
#include "spectral_econ/parallel.hpp"
#include "spectral_econ/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace spectral_econ::game {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

Eigen::Index dim(const NormalizedGame& game) { return game.b.size(); }

void require_convergent(const NormalizedGame& game, const char* what) {
    if (game.rho >= 1.0 - kDivergenceMargin) {
        throw DivergenceError(fmt::format(
            "{}: rho(M) = {} >= 1, feedback effects blow up and no finite equilibrium exists",
            what, game.rho));
    }
}

void require_welfare_setting(const NormalizedGame& game, const char* what) {
    if (!game.uniform_gamma) {
        throw PreconditionViolation(
            fmt::format("{}: welfare analysis requires equal cost coefficients gamma", what));
    }
    if (!game.m.is_symmetric(kSymmetryTolerance)) {
        throw PreconditionViolation(fmt::format("{}: M must be symmetric", what));
    }
    if (2.0 * game.rho >= 1.0 - kDivergenceMargin) {
        throw DivergenceError(fmt::format(
            "{}: 2 rho(M) = {} >= 1, the social optimum is not finite", what, 2.0 * game.rho));
    }
}

// Quadratic form Q with V(S b) = b^T Q b for the action map x = S b.
Matrix welfare_form(const Matrix& s, const Matrix& m) {
    Matrix q = -0.5 * s.transpose() * s + s + s.transpose() * m * s;
    return 0.5 * (q + q.transpose());
}

struct RatioProblem {
    Matrix q_eff;
    Matrix q_nash;

    double value(const Vector& b) const { return b.dot(q_eff * b) / b.dot(q_nash * b); }
    Vector gradient(const Vector& b) const {
        const double den = b.dot(q_nash * b);
        const double r = b.dot(q_eff * b) / den;
        return 2.0 * (q_eff * b - r * (q_nash * b)) / den;
    }
};

// Projection onto the positive part of the unit sphere; keeps the orthant open.
Vector project(Vector b) {
    constexpr double floor = 1e-12;
    b = b.cwiseMax(floor);
    return b / b.norm();
}

struct StartOutcome {
    double value = -std::numeric_limits<double>::infinity();
    Vector b;
    bool converged = false;
};

StartOutcome ascend(const RatioProblem& problem, Vector b, const PoaSearchOptions& options) {
    StartOutcome out;
    b = project(std::move(b));
    double value = problem.value(b);
    double step = 1.0;
    for (int it = 0; it < options.max_iterations; ++it) {
        const Vector grad = problem.gradient(b);
        bool improved = false;
        while (step > 1e-16) {
            Vector candidate = project(b + step * grad);
            const double cv = problem.value(candidate);
            if (cv > value) {
                const double gain = cv - value;
                b = std::move(candidate);
                value = cv;
                improved = true;
                step *= 2.0;
                if (gain <= options.tol * std::abs(value)) out.converged = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) out.converged = true;  // no ascent direction left at any step size
        if (out.converged) break;
    }
    out.value = value;
    out.b = b;
    return out;
}

}  // namespace

void validate(const GameSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.g.size());
    if (spec.gamma.size() != n || spec.beta.size() != n) {
        throw InvalidInput(fmt::format("game with {} agents needs gamma and beta of length {}", n, n));
    }
    if (!(spec.gamma.array() > 0.0).all()) throw InvalidInput("all gamma_i must be positive");
    if (!(spec.beta.array() > 0.0).all()) throw InvalidInput("all beta_i must be positive");
    if (!spec.gamma.allFinite() || !spec.beta.allFinite()) {
        throw InvalidInput("gamma and beta must be finite");
    }
    if (!spec.g.has_zero_diagonal()) throw InvalidInput("spillover matrix g must have zero diagonal");
}

NormalizedGame normalize(const GameSpec& spec) {
    validate(spec);
    NormalizedGame game;
    game.b = spec.beta.cwiseQuotient(spec.gamma);
    Matrix m = spec.g.entries();
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) /= spec.gamma[i];
    game.m = SquareMatrix(std::move(m), spec.g.labels());
    game.rho = spectral_radius(game.m);
    game.uniform_gamma =
        spec.gamma.size() == 0 || (spec.gamma.array() == spec.gamma[0]).all();
    return game;
}

NormalizedGame normalized_from(const Vector& b, const SquareMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    return normalize(GameSpec{Vector::Ones(n), b, m});
}

Vector nash_equilibrium(const NormalizedGame& game, std::vector<std::string>* warnings) {
    require_convergent(game, "nash_equilibrium");
    Vector x = resolvent_solve(game.m, game.b, 1.0, Side::right, game.rho);
    if ((x.array() < 0.0).any() && warnings != nullptr) {
        warnings->push_back(
            "equilibrium has negative components; reporting the unconstrained solution");
    }
    return x;
}

BestResponseTrace best_response_dynamics(const NormalizedGame& game, const Vector& x0, int t_max,
                                         double tol) {
    if (x0.size() != dim(game)) throw InvalidInput("best_response_dynamics: x0 has the wrong length");
    if (t_max < 0 || !(tol > 0.0)) throw InvalidInput("best_response_dynamics: need t_max >= 0, tol > 0");
    constexpr int kGrowthWindow = 10;
    BestResponseTrace trace;
    trace.trajectory.push_back(x0);
    double first_step = -1.0, last_step = -1.0;
    int growing = 0;
    for (int t = 0; t < t_max; ++t) {
        const Vector& x = trace.trajectory.back();
        Vector next = game.b + game.m.entries() * x;
        const double step = (next - x).cwiseAbs().maxCoeff();
        trace.trajectory.push_back(std::move(next));
        if (!trace.trajectory.back().allFinite()) {
            trace.diverging = true;
            break;
        }
        if (step <= tol) {
            trace.converged = true;
            break;
        }
        if (first_step < 0.0) first_step = step;
        growing = (last_step >= 0.0 && step > last_step) ? growing + 1 : 0;
        last_step = step;
        if (growing >= kGrowthWindow && step > 10.0 * first_step) {
            trace.diverging = true;
            break;
        }
    }
    return trace;
}

Vector keyness(const NormalizedGame& game) {
    require_convergent(game, "keyness");
    return resolvent_solve(game.m, Vector::Ones(dim(game)), 1.0, Side::left, game.rho);
}

double total_welfare(const NormalizedGame& game, const Vector& x) {
    if (!game.uniform_gamma) {
        throw PreconditionViolation("total_welfare requires equal cost coefficients gamma");
    }
    if (x.size() != dim(game)) throw InvalidInput("total_welfare: x has the wrong length");
    const Vector marginal = game.b + game.m.entries() * x;
    return -0.5 * x.squaredNorm() + marginal.dot(x);
}

Vector efficient_profile(const NormalizedGame& game) {
    require_welfare_setting(game, "efficient_profile");
    return resolvent_solve(game.m, game.b, 2.0, Side::right, game.rho);
}

double welfare_ratio(const NormalizedGame& game, const Vector& b) {
    NormalizedGame shifted = game;
    shifted.b = b;
    return total_welfare(shifted, efficient_profile(shifted)) /
           total_welfare(shifted, nash_equilibrium(shifted));
}

PoaResult price_of_anarchy(const NormalizedGame& game, PoaMode mode,
                           const PoaSearchOptions& options) {
    require_welfare_setting(game, "price_of_anarchy");
    PoaResult result;
    result.mode = mode;
    if (mode == PoaMode::closed_form) {
        const double ratio = (1.0 - game.rho) / (1.0 - 2.0 * game.rho);
        result.value = ratio * ratio;
        return result;
    }

    const auto n = dim(game);
    const Matrix& m = game.m.entries();
    const Matrix identity = Matrix::Identity(n, n);
    RatioProblem problem{welfare_form((identity - 2.0 * m).partialPivLu().inverse(), m),
                         welfare_form((identity - m).partialPivLu().inverse(), m)};

    // Initial directions: leading eigenvectors (both sign patterns) and random positive vectors.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    std::vector<Vector> starts;
    for (int k = 0; k < std::min<int>(3, static_cast<int>(n)); ++k) {
        const Vector w = eig.eigenvectors().col(n - 1 - k);
        starts.push_back(w.cwiseAbs());
        starts.push_back(w.cwiseMax(0.0) + Vector::Constant(n, 1e-3));
    }
    for (std::size_t s = starts.size(); s < static_cast<std::size_t>(options.starts); ++s) {
        Rng rng = replicate_rng(options.seed, s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng) + 1e-6;
        starts.push_back(v);
    }
    starts.resize(static_cast<std::size_t>(std::max(1, options.starts)));

    std::vector<StartOutcome> outcomes(starts.size());
    parallel_for(starts.size(), options.threads,
                 [&](std::size_t s) { outcomes[s] = ascend(problem, starts[s], options); });

    std::size_t best = 0;
    bool any_converged = false;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        any_converged = any_converged || outcomes[s].converged;
        if (outcomes[s].value > outcomes[best].value) best = s;
    }
    if (!any_converged) {
        throw NumericFailure(fmt::format(
            "empirical price-of-anarchy search did not converge; best ratio found {}",
            outcomes[best].value));
    }
    result.value = outcomes[best].value;
    result.maximizer = outcomes[best].b;
    result.starts = static_cast<int>(starts.size());
    return result;
}

EquilibriumReport analyze(const NormalizedGame& game) {
    EquilibriumReport report;
    report.x_star = nash_equilibrium(game, &report.warnings);
    report.keyness = keyness(game);
    if (game.uniform_gamma) report.welfare_nash = total_welfare(game, report.x_star);
    if (game.uniform_gamma && game.m.is_symmetric(kSymmetryTolerance) && 2.0 * game.rho < 1.0 - kDivergenceMargin) {
        report.x_eff = efficient_profile(game);
        report.welfare_eff = total_welfare(game, *report.x_eff);
        report.poa_closed_form = price_of_anarchy(game, PoaMode::closed_form).value;
    }
    return report;
}

GameSpec game_spec_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInput("game spec must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "gamma" && it.key() != "beta" && it.key() != "g") {
            throw InvalidInput(fmt::format("unknown key '{}' in game spec", it.key()));
        }
    }
    if (!j.contains("gamma") || !j.contains("beta") || !j.contains("g")) {
        throw InvalidInput("game spec needs 'gamma', 'beta' and 'g'");
    }
    GameSpec spec{vector_from_json(j["gamma"], "gamma"), vector_from_json(j["beta"], "beta"),
                  io::matrix_from_json(j["g"])};
    validate(spec);
    return spec;
}

Json to_json(const GameSpec& spec) {
    Json j;
    j["gamma"] = vector_to_json(spec.gamma);
    j["beta"] = vector_to_json(spec.beta);
    j["g"] = io::matrix_to_json(spec.g);
    return j;
}

Json to_json(const EquilibriumReport& report) {
    Json j;
    j["x_star"] = vector_to_json(report.x_star);
    j["welfare_nash"] = report.welfare_nash;
    j["x_eff"] = report.x_eff ? vector_to_json(*report.x_eff) : Json(nullptr);
    j["welfare_eff"] = report.welfare_eff ? Json(*report.welfare_eff) : Json(nullptr);
    j["keyness"] = vector_to_json(report.keyness);
    j["poa_closed_form"] = report.poa_closed_form ? Json(*report.poa_closed_form) : Json(nullptr);
    j["warnings"] = report.warnings;
    return j;
}

EquilibriumReport equilibrium_report_from_json(const Json& j) {
    EquilibriumReport report;
    try {
        report.x_star = vector_from_json(j.at("x_star"), "x_star");
        report.welfare_nash = j.at("welfare_nash").get<double>();
        if (!j.at("x_eff").is_null()) report.x_eff = vector_from_json(j["x_eff"], "x_eff");
        if (!j.at("welfare_eff").is_null()) report.welfare_eff = j["welfare_eff"].get<double>();
        report.keyness = vector_from_json(j.at("keyness"), "keyness");
        if (!j.at("poa_closed_form").is_null()) {
            report.poa_closed_form = j["poa_closed_form"].get<double>();
        }
        report.warnings = j.at("warnings").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed equilibrium report: {}", e.what()));
    }
    return report;
}

Json to_json(const PoaResult& result) {
    Json j;
    j["mode"] = result.mode == PoaMode::closed_form ? "closed_form" : "empirical";
    j["value"] = result.value;
    j["maximizer"] = result.maximizer ? vector_to_json(*result.maximizer) : Json(nullptr);
    j["starts"] = result.starts;
    return j;
}

}  // namespace spectral_econ::game
