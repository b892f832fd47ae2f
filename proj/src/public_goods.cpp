#include "spectral_econ/public_goods.hpp"

#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "spectral_econ/matrix_io.hpp"
#include "spectral_econ/parallel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace spectral_econ::goods {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Finite-difference self-check runs at construction for models up to this size.
constexpr std::size_t kSelfCheckMaxAgents = 64;
constexpr double kGradientTolerance = 1e-5;

void validate_family(const SquareMatrix& g, const Vector& c, const char* family) {
    require_nonnegative(g, family);
    if (!g.has_zero_diagonal()) {
        throw InvalidInput(fmt::format("{}: benefit matrix g must have zero diagonal", family));
    }
    if (c.size() != idx(g.size())) {
        throw InvalidInput(fmt::format("{}: c_shift must have length {}", family, g.size()));
    }
    if (!(c.array() > 0.0).all() || !c.allFinite()) {
        throw InvalidInput(fmt::format("{}: c_shift entries must be positive", family));
    }
}

void self_check(const UtilityModel& u, const char* family) {
    if (u.size() > kSelfCheckMaxAgents) return;
    const auto n = idx(u.size());
    for (const Vector& x : {Vector(Vector::Zero(n)), Vector(Vector::Ones(n))}) {
        const double err = gradient_error(u, x);
        if (err > kGradientTolerance) {
            throw NumericFailure(
                fmt::format("{}: gradient disagrees with finite differences ({})", family, err));
        }
    }
}

void require_point(const UtilityModel& u, const Vector& x) {
    if (x.size() != idx(u.size())) {
        throw InvalidInput(fmt::format("action profile has length {} for {} agents", x.size(),
                                       u.size()));
    }
    if (!x.allFinite() || (x.array() < 0.0).any()) {
        throw InvalidInput("action profile must be finite and nonnegative");
    }
}

}  // namespace

Matrix UtilityModel::jacobian(const Vector& x) const {
    const auto n = idx(size());
    Matrix d(n, n);
    for (std::size_t i = 0; i < size(); ++i) d.row(idx(i)) = gradient(i, x).transpose();
    return d;
}

LinearBenefitModel::LinearBenefitModel(SquareMatrix g, Vector c_shift)
    : g_(std::move(g)), c_(std::move(c_shift)) {
    validate_family(g_, c_, "linear benefit model");
    self_check(*this, "linear benefit model");
}

double LinearBenefitModel::value(std::size_t i, const Vector& x) const {
    const auto k = idx(i);
    const double own = x[k] + c_[k];
    return -0.5 * own * own + g_.entries().row(k).dot(x);
}

Vector LinearBenefitModel::gradient(std::size_t i, const Vector& x) const {
    const auto k = idx(i);
    Vector grad = g_.entries().row(k).transpose();
    grad[k] = -(x[k] + c_[k]);
    return grad;
}

LogBenefitModel::LogBenefitModel(SquareMatrix g, Vector c_shift)
    : g_(std::move(g)), c_(std::move(c_shift)) {
    validate_family(g_, c_, "log benefit model");
    self_check(*this, "log benefit model");
}

double LogBenefitModel::value(std::size_t i, const Vector& x) const {
    const auto k = idx(i);
    const double own = x[k] + c_[k];
    const Vector logs = x.array().log1p();
    return -0.5 * own * own + g_.entries().row(k).dot(logs);
}

Vector LogBenefitModel::gradient(std::size_t i, const Vector& x) const {
    const auto k = idx(i);
    Vector grad = g_.entries().row(k).transpose().cwiseQuotient(
        (Vector::Ones(x.size()) + x));
    grad[k] = -(x[k] + c_[k]);
    return grad;
}

ScaledModel::ScaledModel(std::shared_ptr<const UtilityModel> inner, Vector scale)
    : inner_(std::move(inner)), scale_(std::move(scale)) {
    if (scale_.size() != idx(inner_->size()) || !(scale_.array() > 0.0).all()) {
        throw InvalidInput("scaled model needs one positive factor per agent");
    }
}

double ScaledModel::value(std::size_t i, const Vector& x) const {
    return scale_[idx(i)] * inner_->value(i, x);
}

Vector ScaledModel::gradient(std::size_t i, const Vector& x) const {
    return scale_[idx(i)] * inner_->gradient(i, x);
}

std::unique_ptr<UtilityModel> linear_benefit_family(const SquareMatrix& g, const Vector& c_shift) {
    return std::make_unique<LinearBenefitModel>(g, c_shift);
}

std::unique_ptr<UtilityModel> log_benefit_family(const SquareMatrix& g, const Vector& c_shift) {
    return std::make_unique<LogBenefitModel>(g, c_shift);
}

double gradient_error(const UtilityModel& u, const Vector& x, double h) {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vector analytic = u.gradient(i, x);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            Vector up = x, down = x;
            up[j] += h;
            down[j] -= h;
            const double numeric = (u.value(i, up) - u.value(i, down)) / (2.0 * h);
            const double err = std::abs(numeric - analytic[j]) / std::max(1.0, std::abs(analytic[j]));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

BenefitsMatrix benefits_matrix(const UtilityModel& u, const Vector& x) {
    require_point(u, x);
    const Matrix d = u.jacobian(x);
    const auto n = d.rows();
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double own = d(i, i);
        if (!(own < 0.0)) {
            throw ModelViolation(fmt::format(
                "agent {} has du_i/dx_i = {} >= 0; actions must be costly", i, own));
        }
        b.row(i) = d.row(i) / (-own);
        b(i, i) = 0.0;
    }
    return {SquareMatrix(std::move(b)), x};
}

ParetoVerdict pareto_classify(const UtilityModel& u, const Vector& x, double tol) {
    const BenefitsMatrix bm = benefits_matrix(u, x);
    if (!bm.b.is_nonnegative()) {
        throw ModelViolation("benefits matrix has negative entries; external effects must be benefits");
    }
    if (!is_irreducible(bm.b)) {
        throw PreconditionViolation(
            "B(x) is reducible: the agents can be partitioned so that one group confers no "
            "benefit on the other");
    }
    ParetoVerdict verdict;
    verdict.rho = spectral_radius(bm.b);
    const PerronPair pair = perron_pair(bm.b);
    if (verdict.rho > 1.0 + tol) {
        verdict.classification = ParetoClass::improvable_up;
        verdict.direction = pair.right / pair.right.maxCoeff();
    } else if (verdict.rho < 1.0 - tol) {
        verdict.classification = ParetoClass::improvable_down;
        verdict.direction = -pair.right / pair.right.maxCoeff();
    } else {
        verdict.classification = ParetoClass::efficient;
        // theta^T D = 0 with D = diag(-d_ii) (B - I): theta_i proportional to c_i / (-d_ii).
        const Matrix d = u.jacobian(x);
        Vector theta = pair.left.cwiseQuotient(-d.diagonal());
        verdict.weights = theta / theta.sum();
    }
    return verdict;
}

ImprovementCheck verify_improvement(const UtilityModel& u, const Vector& x, const Vector& direction,
                                    double eta) {
    require_point(u, x);
    if (direction.size() != x.size()) throw InvalidInput("direction has the wrong length");
    if (!(eta > 0.0)) throw InvalidInput("verify_improvement: eta must be positive");
    ImprovementCheck check;
    check.eta = eta;
    check.first_order_gains = u.jacobian(x) * direction;
    const Vector moved = x + eta * direction;
    check.actual_gains.resize(x.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        check.actual_gains[idx(i)] = u.value(i, moved) - u.value(i, x);
    }
    return check;
}

EssentialReport essential_agents(const UtilityModel& u, int threads) {
    const auto n = idx(u.size());
    const BenefitsMatrix at_zero = benefits_matrix(u, Vector::Zero(n));
    EssentialReport report;
    report.rho = nonnegative_spectral_radius(at_zero.b);
    report.cooperation_possible = report.rho > 1.0;
    report.agents.resize(u.size());
    parallel_for(u.size(), threads, [&](std::size_t i) {
        const double without = nonnegative_spectral_radius(at_zero.b.without_node(i));
        report.agents[i] = {i, without, report.cooperation_possible && without < 1.0};
    });
    return report;
}

Vector locate_efficient_point(const UtilityModel& u, const Vector& ray, double s_max, double tol) {
    if (ray.size() != idx(u.size()) || (ray.array() < 0.0).any() || ray.maxCoeff() <= 0.0) {
        throw InvalidInput("locate_efficient_point: ray must be nonnegative and nonzero");
    }
    auto excess = [&](double s) { return spectral_radius(benefits_matrix(u, s * ray).b) - 1.0; };
    if (!(excess(0.0) > 0.0)) {
        throw PreconditionViolation("locate_efficient_point: rho(B(0)) must exceed 1");
    }
    double lo = 0.0, hi = 1.0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > s_max) {
            throw NumericFailure(
                fmt::format("rho(B(s * ray)) stays above 1 for s up to {}", s_max));
        }
    }
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double e = excess(mid);
        if (e == 0.0) return mid * ray;
        (e > 0.0 ? lo : hi) = mid;
    }
    return (std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi) * ray;
}

Vector weighted_stationarity(const UtilityModel& u, const Vector& x, const Vector& theta) {
    return u.jacobian(x).transpose() * theta;
}

const char* to_string(ParetoClass c) {
    switch (c) {
        case ParetoClass::improvable_up: return "improvable_up";
        case ParetoClass::improvable_down: return "improvable_down";
        case ParetoClass::efficient: return "efficient";
    }
    return "unknown";
}

std::unique_ptr<UtilityModel> utility_model_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInput("utility model must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "family" && it.key() != "g" && it.key() != "c_shift") {
            throw InvalidInput(fmt::format("unknown key '{}' in utility model", it.key()));
        }
    }
    if (!j.contains("family") || !j["family"].is_string() || !j.contains("g")) {
        throw InvalidInput("utility model needs 'family' and 'g'");
    }
    const SquareMatrix g = io::matrix_from_json(j["g"]);
    const Vector c = j.contains("c_shift") ? vector_from_json(j["c_shift"], "c_shift")
                                           : Vector(Vector::Ones(idx(g.size())));
    const auto family = j["family"].get<std::string>();
    if (family == "linear") return linear_benefit_family(g, c);
    if (family == "log") return log_benefit_family(g, c);
    throw InvalidInput(fmt::format("unknown utility family '{}'", family));
}

Json to_json(const ParetoVerdict& verdict) {
    Json j;
    j["rho"] = verdict.rho;
    j["classification"] = to_string(verdict.classification);
    j["direction"] = verdict.direction ? vector_to_json(*verdict.direction) : Json(nullptr);
    j["weights"] = verdict.weights ? vector_to_json(*verdict.weights) : Json(nullptr);
    return j;
}

ParetoVerdict pareto_verdict_from_json(const Json& j) {
    ParetoVerdict v;
    try {
        v.rho = j.at("rho").get<double>();
        const auto c = j.at("classification").get<std::string>();
        if (c == "improvable_up") v.classification = ParetoClass::improvable_up;
        else if (c == "improvable_down") v.classification = ParetoClass::improvable_down;
        else if (c == "efficient") v.classification = ParetoClass::efficient;
        else throw InvalidInput(fmt::format("unknown classification '{}'", c));
        if (!j.at("direction").is_null()) v.direction = vector_from_json(j["direction"], "direction");
        if (!j.at("weights").is_null()) v.weights = vector_from_json(j["weights"], "weights");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed Pareto verdict: {}", e.what()));
    }
    return v;
}

Json to_json(const EssentialReport& report) {
    Json j;
    j["rho"] = report.rho;
    j["cooperation_possible"] = report.cooperation_possible;
    Json agents = Json::array();
    for (const auto& a : report.agents) {
        agents.push_back({{"agent", a.agent + 1}, {"rho_without", a.rho_without},
                          {"essential", a.essential}});
    }
    j["agents"] = std::move(agents);
    return j;
}

EssentialReport essential_report_from_json(const Json& j) {
    EssentialReport r;
    try {
        r.rho = j.at("rho").get<double>();
        r.cooperation_possible = j.at("cooperation_possible").get<bool>();
        for (const auto& a : j.at("agents")) {
            r.agents.push_back({a.at("agent").get<std::size_t>() - 1,
                                a.at("rho_without").get<double>(), a.at("essential").get<bool>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(fmt::format("malformed essential-agent report: {}", e.what()));
    }
    return r;
}

Json to_json(const ImprovementCheck& check) {
    Json j;
    j["eta"] = check.eta;
    j["first_order_gains"] = vector_to_json(check.first_order_gains);
    j["actual_gains"] = vector_to_json(check.actual_gains);
    return j;
}

}  // namespace spectral_econ::goods
