#include "spectral_econ/matrix_core.hpp"

#include "spectral_econ/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace spectral_econ {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector sum_normalized(const Vector& v) {
    const double s = v.sum();
    return v / s;
}

// Real eigenvector for the eigenvalue of largest real part, sign-fixed so the
// entries sum to a positive value.
std::pair<double, Vector> dominant_real_eigenpair(const Matrix& a) {
    Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw NumericFailure(fmt::format("eigensolver failed to converge on {}x{} matrix",
                                         a.rows(), a.cols()));
    }
    const auto& values = solver.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < values.size(); ++k) {
        if (values[k].real() > values[best].real()) best = k;
    }
    Vector v = solver.eigenvectors().col(best).real();
    if (v.sum() < 0.0) v = -v;
    return {values[best].real(), v};
}

}  // namespace

std::vector<std::vector<std::size_t>> strongly_connected_components(const SquareMatrix& m) {
    const std::size_t n = m.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    // Iterative Tarjan: each frame is (node, next neighbour to inspect).
    std::vector<std::pair<std::size_t, std::size_t>> frames;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        frames.emplace_back(root, 0);
        index[root] = lowlink[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < n) {
                const std::size_t w = next++;
                if (!m.has_edge(v, w)) continue;
                if (index[w] == unvisited) {
                    index[w] = lowlink[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    lowlink[v] = std::min(lowlink[v], index[w]);
                }
                continue;
            }
            const std::size_t done = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().first;
                lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
            }
            if (lowlink[done] == index[done]) {
                std::vector<std::size_t> component;
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component.push_back(w);
                } while (w != done);
                std::sort(component.begin(), component.end());
                components.push_back(std::move(component));
            }
        }
    }
    return components;
}

bool is_irreducible(const SquareMatrix& m) {
    require_nonnegative(m, "is_irreducible");
    if (m.size() <= 1) return true;
    return strongly_connected_components(m).size() == 1;
}

int period(const SquareMatrix& m) {
    if (!is_irreducible(m)) {
        throw PreconditionViolation("period is undefined for a reducible matrix");
    }
    const std::size_t n = m.size();
    if (n == 0) return 1;
    std::vector<long> level(n, -1);
    std::queue<std::size_t> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (m.has_edge(u, v) && level[v] < 0) {
                level[v] = level[u] + 1;
                frontier.push(v);
            }
        }
    }
    long g = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (m.has_edge(u, v)) g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
        }
    }
    // A single node without a self-loop has no cycles; treat it as period 1.
    return g == 0 ? 1 : static_cast<int>(g);
}

bool is_aperiodic(const SquareMatrix& m) { return period(m) == 1; }

bool is_primitive(const SquareMatrix& m) { return is_irreducible(m) && period(m) == 1; }

std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m) {
    std::vector<std::complex<double>> out;
    if (m.size() == 0) return out;
    if (m.is_symmetric()) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m.entries(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw NumericFailure("symmetric eigensolver failed to converge");
        }
        for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
            out.emplace_back(solver.eigenvalues()[k], 0.0);
        }
        return out;
    }
    Eigen::EigenSolver<Matrix> solver(m.entries(), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericFailure(
            fmt::format("eigensolver failed to converge on {}x{} matrix", m.size(), m.size()));
    }
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        out.push_back(solver.eigenvalues()[k]);
    }
    return out;
}

double spectral_radius(const SquareMatrix& m) {
    double rho = 0.0;
    for (const auto& lambda : eigenvalues(m)) rho = std::max(rho, std::abs(lambda));
    return rho;
}

double nonnegative_spectral_radius(const SquareMatrix& m) {
    require_nonnegative(m, "nonnegative_spectral_radius");
    double rho = 0.0;
    for (const auto& component : strongly_connected_components(m)) {
        if (component.size() == 1) {
            const std::size_t i = component.front();
            if (m.has_edge(i, i)) rho = std::max(rho, m(i, i));
            continue;
        }
        const auto k = idx(component.size());
        Matrix block(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) {
                block(a, b) = m(component[a], component[b]);
            }
        }
        rho = std::max(rho, spectral_radius(SquareMatrix(std::move(block))));
    }
    return rho;
}

PerronPair perron_pair(const SquareMatrix& m) {
    if (m.size() < 2) {
        throw PreconditionViolation("perron_pair requires at least two nodes");
    }
    if (!is_irreducible(m)) {
        throw PreconditionViolation("perron_pair requires an irreducible matrix");
    }
    auto [rho_right, right] = dominant_real_eigenpair(m.entries());
    auto [rho_left, left] = dominant_real_eigenpair(m.entries().transpose());

    PerronPair pair;
    pair.rho = 0.5 * (rho_right + rho_left);
    pair.right = sum_normalized(right);
    pair.left = sum_normalized(left);
    if (!(pair.right.minCoeff() > 0.0) || !(pair.left.minCoeff() > 0.0)) {
        throw NumericFailure(fmt::format(
            "computed Perron vectors are not strictly positive (min right {}, min left {})",
            pair.right.minCoeff(), pair.left.minCoeff()));
    }
    return pair;
}

PowerIterationResult power_iteration(const SquareMatrix& m, double shift, int max_iterations,
                                     double tol) {
    require_nonnegative(m, "power_iteration");
    const auto n = idx(m.size());
    PowerIterationResult result;
    if (n == 0) return result;
    Matrix shifted = m.entries();
    shifted.diagonal().array() += shift;
    Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
    double lambda = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Vector y = shifted * x;
        lambda = y.sum();
        if (!(lambda > 0.0)) break;
        y /= lambda;
        const double change = (y - x).cwiseAbs().maxCoeff();
        x = std::move(y);
        result.iterations = it;
        if (change <= tol) {
            result.converged = true;
            break;
        }
    }
    result.rho = lambda - shift;
    result.vector = x;
    return result;
}

std::vector<GelfandTerm> gelfand_trace_sequence(const SquareMatrix& m, int t_max) {
    require_nonnegative(m, "gelfand_trace_sequence");
    if (t_max < 1) throw InvalidInput("gelfand_trace_sequence: t_max must be >= 1");
    const auto n = idx(m.size());
    std::vector<GelfandTerm> terms;
    terms.reserve(static_cast<std::size_t>(t_max));

    // power = M^t / exp(log_scale)
    Matrix power = Matrix::Identity(n, n);
    double log_scale = 0.0;
    bool vanished = n == 0;
    for (int t = 1; t <= t_max; ++t) {
        GelfandTerm term{t, std::nullopt};
        if (!vanished) {
            power = power * m.entries();
            const double peak = power.cwiseAbs().maxCoeff();
            if (peak == 0.0) {
                vanished = true;  // nilpotent: every later power is zero too
            } else {
                power /= peak;
                log_scale += std::log(peak);
                const double trace = power.trace();
                if (trace > 0.0) {
                    const double value = std::exp((std::log(trace) + log_scale) / t);
                    if (!std::isfinite(value)) {
                        throw NumericFailure(
                            fmt::format("trace power overflowed at t = {}", t));
                    }
                    term.value = value;
                }
            }
            if (!power.allFinite()) {
                throw NumericFailure(fmt::format("matrix power overflowed at t = {}", t));
            }
        }
        terms.push_back(term);
    }
    return terms;
}

Vector resolvent_solve(const SquareMatrix& m, const Vector& z, double delta, Side side) {
    if (delta == 0.0) return resolvent_solve(m, z, delta, side, 0.0);
    return resolvent_solve(m, z, delta, side, spectral_radius(m));
}

Vector resolvent_solve(const SquareMatrix& m, const Vector& z, double delta, Side side,
                       double rho) {
    if (!std::isfinite(delta) || delta < 0.0) {
        throw InvalidInput(fmt::format("decay parameter must be >= 0, got {}", delta));
    }
    if (z.size() != idx(m.size())) {
        throw InvalidInput(
            fmt::format("vector has length {} but matrix is {}x{}", z.size(), m.size(), m.size()));
    }
    // within rounding of 1 the system is singular in practice
    if (delta * rho >= 1.0 - kDivergenceMargin) {
        throw DivergenceError(fmt::format(
            "no finite solution: delta * rho(M) = {} >= 1, the Neumann series diverges",
            delta * rho));
    }
    if (delta == 0.0) return z;
    const auto n = idx(m.size());
    Matrix system = Matrix::Identity(n, n);
    if (side == Side::left) {
        system -= delta * m.entries().transpose();
    } else {
        system -= delta * m.entries();
    }
    Vector k = system.partialPivLu().solve(z);
    if (!k.allFinite()) throw NumericFailure("resolvent solve produced non-finite values");
    return k;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    const double denom = a.norm() * b.norm();
    if (denom == 0.0) return 0.0;
    return a.dot(b) / denom;
}

}  // namespace spectral_econ
