#pragma once

#include "spectral_econ/json_format.hpp"
#include "spectral_econ/square_matrix.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spectral_econ::goods {

inline constexpr double kEfficiencyTolerance = 1e-6;

/// Utility functions u_i(x) over a common action profile x >= 0.
///
/// Models are expected to have costly own actions (du_i/dx_i < 0) and
/// nonnegative external benefits (du_i/dx_j >= 0, j != i). The built-ins
/// satisfy both for every x >= 0.
class UtilityModel {
public:
    virtual ~UtilityModel() = default;

    [[nodiscard]] virtual std::size_t size() const = 0;
    [[nodiscard]] virtual double value(std::size_t i, const Vector& x) const = 0;
    [[nodiscard]] virtual Vector gradient(std::size_t i, const Vector& x) const = 0;

    /// Row i holds gradient(i, x).
    [[nodiscard]] Matrix jacobian(const Vector& x) const;
};

/// u_i(x) = -1/2 (x_i + c_i)^2 + sum_j g_ij x_j
class LinearBenefitModel final : public UtilityModel {
public:
    LinearBenefitModel(SquareMatrix g, Vector c_shift);

    [[nodiscard]] std::size_t size() const override { return g_.size(); }
    [[nodiscard]] double value(std::size_t i, const Vector& x) const override;
    [[nodiscard]] Vector gradient(std::size_t i, const Vector& x) const override;

    [[nodiscard]] const SquareMatrix& g() const { return g_; }
    [[nodiscard]] const Vector& c_shift() const { return c_; }

private:
    SquareMatrix g_;
    Vector c_;
};

/// u_i(x) = -1/2 (x_i + c_i)^2 + sum_j g_ij log(1 + x_j)
class LogBenefitModel final : public UtilityModel {
public:
    LogBenefitModel(SquareMatrix g, Vector c_shift);

    [[nodiscard]] std::size_t size() const override { return g_.size(); }
    [[nodiscard]] double value(std::size_t i, const Vector& x) const override;
    [[nodiscard]] Vector gradient(std::size_t i, const Vector& x) const override;

    [[nodiscard]] const SquareMatrix& g() const { return g_; }
    [[nodiscard]] const Vector& c_shift() const { return c_; }

private:
    SquareMatrix g_;
    Vector c_;
};

/// Positive rescaling a_i u_i of another model; used to check that benefits
/// and verdicts do not depend on the units of each utility.
class ScaledModel final : public UtilityModel {
public:
    ScaledModel(std::shared_ptr<const UtilityModel> inner, Vector scale);

    [[nodiscard]] std::size_t size() const override { return inner_->size(); }
    [[nodiscard]] double value(std::size_t i, const Vector& x) const override;
    [[nodiscard]] Vector gradient(std::size_t i, const Vector& x) const override;

private:
    std::shared_ptr<const UtilityModel> inner_;
    Vector scale_;
};

std::unique_ptr<UtilityModel> linear_benefit_family(const SquareMatrix& g, const Vector& c_shift);
std::unique_ptr<UtilityModel> log_benefit_family(const SquareMatrix& g, const Vector& c_shift);

/// Largest relative deviation between model gradients and central finite
/// differences of model values at x.
double gradient_error(const UtilityModel& u, const Vector& x, double h = 1e-6);

struct BenefitsMatrix {
    SquareMatrix b;  // b_ij = (du_i/dx_j) / (-du_i/dx_i), zero diagonal
    Vector at_x;
};

enum class ParetoClass { improvable_up, improvable_down, efficient };

struct ParetoVerdict {
    double rho = 0.0;
    ParetoClass classification = ParetoClass::efficient;
    std::optional<Vector> direction;  // +c or -c, with ||c||_inf = 1
    std::optional<Vector> weights;    // theta, sum 1, with theta^T D(x) = 0
};

struct ImprovementCheck {
    Vector first_order_gains;  // D(x) * direction
    Vector actual_gains;       // u_i(x + eta direction) - u_i(x)
    double eta = 0.0;
};

struct AgentRemoval {
    std::size_t agent = 0;
    double rho_without = 0.0;
    bool essential = false;
};

struct EssentialReport {
    double rho = 0.0;
    bool cooperation_possible = false;  // rho(B(0)) > 1
    std::vector<AgentRemoval> agents;
};

BenefitsMatrix benefits_matrix(const UtilityModel& u, const Vector& x);

ParetoVerdict pareto_classify(const UtilityModel& u, const Vector& x,
                              double tol = kEfficiencyTolerance);

ImprovementCheck verify_improvement(const UtilityModel& u, const Vector& x, const Vector& direction,
                                    double eta);

EssentialReport essential_agents(const UtilityModel& u, int threads = 1);

/// Bisection for s >= 0 with rho(B(s * ray)) = 1, assuming rho decreases
/// along the ray and rho(B(0)) > 1. Grows the bracket up to s_max.
Vector locate_efficient_point(const UtilityModel& u, const Vector& ray, double s_max = 1e6,
                              double tol = 1e-14);

/// theta^T D(x) for the given weights.
Vector weighted_stationarity(const UtilityModel& u, const Vector& x, const Vector& theta);

const char* to_string(ParetoClass c);

/// {"family": "linear"|"log", "g": {matrix}, "c_shift": [...]}
std::unique_ptr<UtilityModel> utility_model_from_json(const Json& j);

Json to_json(const ParetoVerdict& verdict);
ParetoVerdict pareto_verdict_from_json(const Json& j);
Json to_json(const EssentialReport& report);
EssentialReport essential_report_from_json(const Json& j);
Json to_json(const ImprovementCheck& check);

}  // namespace spectral_econ::goods
