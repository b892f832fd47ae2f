#include "spectral_econ/centrality.hpp"
#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "spectral_econ/network_game.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace spectral_econ;
using namespace spectral_econ::game;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

// Nonnegative, zero diagonal, rescaled to the requested spectral radius.
Matrix scaled_spillovers(std::mt19937_64& rng, int n, double rho, bool symmetric) {
    Matrix a = symmetric ? Matrix(oracle::random_symmetric(rng, n, 1.0).cwiseAbs())
                         : oracle::random_irreducible(rng, n, 0.4);
    a.diagonal().setZero();
    const double r = symmetric ? oracle::jacobi_eigenvalues(a).cwiseAbs().maxCoeff()
                               : oracle::left_perron_power(a).first;
    return a * (rho / r);
}

Vector positive(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = u(rng);
    return b;
}

const SquareMatrix kHalf{{0, 0.5}, {0.5, 0}};
const SquareMatrix kQuarter{{0, 0.25}, {0.25, 0}};

}  // namespace

TEST_CASE("normalization divides by gamma") {
    const auto g = normalize(GameSpec{vec({2, 2}), vec({2, 4}), SquareMatrix{{0, 1}, {1, 0}}});
    CHECK(g.b == vec({1, 2}));
    CHECK(g.m == kHalf);
    CHECK(g.rho == doctest::Approx(0.5));
    CHECK(g.uniform_gamma);

    const auto id = normalize(GameSpec{vec({1, 1}), vec({3, 4}), kHalf});
    CHECK(id.b == vec({3, 4}));
    CHECK(id.m == kHalf);

    CHECK_THROWS_AS(normalize(GameSpec{vec({0, 1}), vec({1, 1}), kHalf}), InvalidInput);
    CHECK_THROWS_AS(normalize(GameSpec{vec({1, 1}), vec({1, -1}), kHalf}), InvalidInput);
    CHECK_THROWS_AS(normalize(GameSpec{vec({1, 1}), vec({1, 1}), SquareMatrix{{1, 0}, {0, 0}}}),
                    InvalidInput);
}

TEST_CASE("nash equilibrium examples") {
    CHECK(nash_equilibrium(normalized_from(vec({1, 2}), SquareMatrix::zeros(2))) == vec({1, 2}));
    const Vector x = nash_equilibrium(normalized_from(vec({1, 1}), kHalf));
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
    try {
        nash_equilibrium(normalized_from(vec({1, 1}), SquareMatrix{{0, 1}, {1, 0}}));
        FAIL("rho = 1 must diverge");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("blow up") != std::string::npos);
    }
}

TEST_CASE("nash equilibrium is katz-bonacich in the transposed network and a Neumann sum") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 3 + rep;
        const SquareMatrix m(scaled_spillovers(rng, n, 0.7, rep % 2 == 0));
        const Vector b = positive(rng, n);
        const auto game = normalized_from(b, m);
        const Vector x = nash_equilibrium(game);
        const Vector kb = katz_bonacich(m.transposed(), 1.0, b).scores;
        CHECK((x - kb).cwiseAbs().maxCoeff() <= 1e-10 * x.cwiseAbs().maxCoeff());
        const Vector neumann = oracle::neumann(m.entries(), b, 1.0, 200, false);
        CHECK((x - neumann).norm() <= 1e-8 * x.norm());
        // fixed-point residual
        CHECK((x - (b + m.entries() * x)).cwiseAbs().maxCoeff() <= 1e-9 * x.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("scaling all gamma leaves play unchanged") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 2 + rep;
        const Matrix g = scaled_spillovers(rng, n, 0.6, false);
        const Vector beta = positive(rng, n);
        const GameSpec base{Vector::Ones(n), beta, SquareMatrix(g)};
        const Vector x = nash_equilibrium(normalize(base));

        const auto ten = normalize(GameSpec{Vector::Constant(n, 10.0), beta, SquareMatrix(g)});
        CHECK((ten.b - beta / 10).norm() <= 1e-15 * beta.norm());

        // per-agent rescaling of u_i by s_i: gamma, beta and row i of g all scale together
        const Vector s = positive(rng, n);
        Matrix gs = g;
        for (int i = 0; i < n; ++i) gs.row(i) *= s[i];
        const auto scaled = normalize(GameSpec{s, beta.cwiseProduct(s), SquareMatrix(gs)});
        CHECK_FALSE(scaled.uniform_gamma);
        CHECK((nash_equilibrium(scaled) - x).cwiseAbs().maxCoeff() <= 1e-12 * x.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("best-response dynamics") {
    const auto game = normalized_from(vec({1, 1}), kHalf);
    const auto t = best_response_dynamics(game, Vector::Zero(2), 3, 1e-12);
    REQUIRE(t.trajectory.size() == 4);
    CHECK(t.trajectory[1] == vec({1, 1}));
    CHECK(t.trajectory[2] == vec({1.5, 1.5}));
    CHECK(t.trajectory[3] == vec({1.75, 1.75}));

    const auto fixed = best_response_dynamics(game, vec({2, 2}), 100, 1e-12);
    CHECK(fixed.converged);
    CHECK(fixed.trajectory.size() == 2);

    const int n = 5;
    const double c = 1.2 / (n - 1);
    Matrix blow = Matrix::Constant(n, n, c);
    blow.diagonal().setZero();
    const auto wild = normalized_from(Vector::Ones(n), SquareMatrix(blow));
    CHECK(wild.rho == doctest::Approx(1.2));
    const auto d = best_response_dynamics(wild, Vector::Zero(n), 50, 1e-12);
    CHECK(d.diverging);
    CHECK_FALSE(d.converged);
    CHECK(d.trajectory.size() <= 51);
}

TEST_CASE("best-response dynamics converge geometrically") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 15; ++rep) {
        const int n = 3 + rep;
        const double rho = 0.3 + 0.04 * rep;
        const auto game = normalized_from(positive(rng, n), SquareMatrix(scaled_spillovers(rng, n, rho, true)));
        const Vector x = nash_equilibrium(game);
        const auto t = best_response_dynamics(game, Vector::Zero(n), 5000, 1e-13);
        CHECK(t.converged);
        // symmetric M: the 2-norm error contracts by at least rho per step
        const double c0 = x.norm();
        for (std::size_t k = 0; k < t.trajectory.size(); ++k) {
            const double err = (t.trajectory[k] - x).norm();
            CHECK(err <= c0 * std::pow(game.rho, static_cast<double>(k)) * (1 + 1e-9) + 1e-12 * c0);
        }
    }
}

TEST_CASE("keyness") {
    CHECK(keyness(normalized_from(vec({1, 1}), SquareMatrix::zeros(2))) == Vector::Ones(2));
    const Vector k = keyness(normalized_from(vec({1, 1}), kHalf));
    CHECK(k[0] == doctest::Approx(2.0));
    CHECK(k[1] == doctest::Approx(2.0));

    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 3 + rep;
        const SquareMatrix m(scaled_spillovers(rng, n, 0.6, false));
        const Vector b = positive(rng, n);
        const Vector kappa = keyness(normalized_from(b, m));
        CHECK((kappa - katz_bonacich(m, 1.0, Vector::Ones(n)).scores).norm() <= 1e-10 * kappa.norm());
        const double total = nash_equilibrium(normalized_from(b, m)).sum();
        const double h = 1e-6;
        for (int i = 0; i < n; ++i) {
            Vector bp = b;
            bp[i] += h;
            const double slope = (nash_equilibrium(normalized_from(bp, m)).sum() - total) / h;
            CHECK(slope == doctest::Approx(kappa[i]).epsilon(1e-4));
        }
    }
}

TEST_CASE("welfare examples") {
    const auto game = normalized_from(vec({1, 1}), kQuarter);
    CHECK(total_welfare(game, Vector::Zero(2)) == 0.0);
    const Vector x = nash_equilibrium(game);
    CHECK(x[0] == doctest::Approx(4.0 / 3).epsilon(1e-14));
    CHECK(total_welfare(game, x) == doctest::Approx(16.0 / 9).epsilon(1e-14));
    const Vector eff = efficient_profile(game);
    CHECK(eff[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(eff[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(total_welfare(game, eff) == doctest::Approx(2.0).epsilon(1e-14));

    const auto free = normalized_from(vec({1, 3}), SquareMatrix::zeros(2));
    CHECK(efficient_profile(free) == nash_equilibrium(free));

    CHECK_THROWS_AS(efficient_profile(normalized_from(vec({1, 1}), SquareMatrix{{0, 0.1}, {0.2, 0}})),
                    PreconditionViolation);
    CHECK_THROWS_AS(efficient_profile(normalized_from(vec({1, 1}), kHalf)), DivergenceError);
    const auto hetero = normalize(GameSpec{vec({1, 2}), vec({1, 1}), kQuarter});
    CHECK_THROWS_AS(total_welfare(hetero, Vector::Zero(2)), PreconditionViolation);
}

TEST_CASE("welfare identities on random symmetric games") {
    std::mt19937_64 rng(44);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + rep;
        const Matrix m = scaled_spillovers(rng, n, 0.45 * (rep + 1) / 20.0, true);
        const Vector b = positive(rng, n);
        const auto game = normalized_from(b, SquareMatrix(m));
        const Vector x = nash_equilibrium(game);
        const Vector eff = efficient_profile(game);
        const double v_nash = total_welfare(game, x);
        const double v_eff = total_welfare(game, eff);
        CHECK(v_nash == doctest::Approx(0.5 * x.squaredNorm()).epsilon(1e-12));
        CHECK(v_eff >= v_nash - 1e-12 * v_nash);

        Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
        const Vector bt = eig.eigenvectors().transpose() * b;
        double nash_sum = 0.0, eff_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double l = eig.eigenvalues()[i];
            nash_sum += 0.5 * bt[i] * bt[i] / ((1 - l) * (1 - l));
            eff_sum += 0.5 * bt[i] * bt[i] / (1 - 2 * l);
        }
        CHECK(std::abs(v_nash - nash_sum) <= 1e-9 * std::max(1.0, v_nash));
        CHECK(std::abs(v_eff - eff_sum) <= 1e-9 * std::max(1.0, v_eff));

        // the ratio never exceeds the closed-form bound
        const double bound = price_of_anarchy(game, PoaMode::closed_form).value;
        for (int k = 0; k < 5; ++k) CHECK(welfare_ratio(game, positive(rng, n)) <= bound + 1e-9);
    }
}

TEST_CASE("price of anarchy") {
    CHECK(price_of_anarchy(normalized_from(vec({1, 1}), SquareMatrix::zeros(2)), PoaMode::closed_form).value ==
          1.0);
    const auto game = normalized_from(vec({1, 1}), kQuarter);
    CHECK(price_of_anarchy(game, PoaMode::closed_form).value == doctest::Approx(2.25).epsilon(1e-14));

    // With V(x) = -x'x/2 + b'x + x'Mx the attainable supremum along the top
    // eigenvector is (1 - rho)^2 / (1 - 2 rho).
    const auto emp = price_of_anarchy(game, PoaMode::empirical);
    CHECK(emp.value == doctest::Approx(0.75 * 0.75 / 0.5).epsilon(1e-9));
    REQUIRE(emp.maximizer);
    CHECK(cosine_similarity(*emp.maximizer, vec({1, 1})) >= 0.99);
    CHECK(emp.starts == 32);

    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 4 + 2 * rep;
        const double rho = 0.1 + 0.06 * rep;
        const Matrix m = scaled_spillovers(rng, n, rho, true);
        const auto g = normalized_from(Vector::Ones(n), SquareMatrix(m));
        const auto e = price_of_anarchy(g, PoaMode::empirical);
        CHECK(e.value <= price_of_anarchy(g, PoaMode::closed_form).value + 1e-9);
        CHECK(e.value == doctest::Approx((1 - rho) * (1 - rho) / (1 - 2 * rho)).epsilon(1e-6));
        Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
        CHECK(std::abs(cosine_similarity(*e.maximizer, eig.eigenvectors().col(n - 1))) >= 0.99);

        PoaSearchOptions par;
        par.threads = 3;
        CHECK(price_of_anarchy(g, PoaMode::empirical, par).value == e.value);
    }
}

TEST_CASE("game json round-trip") {
    const GameSpec spec{vec({1, 2}), vec({3, 4}), SquareMatrix{{0, 0.1}, {0.3, 0}}};
    const auto back = game_spec_from_json(Json::parse(dump_json(to_json(spec))));
    CHECK(back.gamma == spec.gamma);
    CHECK(back.g == spec.g);
    CHECK_THROWS_AS(game_spec_from_json(Json::parse(R"({"gamma":[1],"beta":[1]})")), InvalidInput);
    CHECK_THROWS_AS(
        game_spec_from_json(Json::parse(R"({"gamma":[1],"beta":[1],"g":{"n":1,"entries":[[0]]},"x":1})")),
        InvalidInput);

    const auto report = analyze(normalized_from(vec({1, 1}), kQuarter));
    const auto r = equilibrium_report_from_json(Json::parse(dump_json(to_json(report))));
    CHECK(r.x_star == report.x_star);
    CHECK(r.welfare_nash == report.welfare_nash);
    REQUIRE(r.x_eff);
    CHECK(*r.x_eff == *report.x_eff);
    CHECK(*r.poa_closed_form == *report.poa_closed_form);

    const auto asym = analyze(normalized_from(vec({1, 1}), SquareMatrix{{0, 0.1}, {0.3, 0}}));
    CHECK_FALSE(asym.x_eff.has_value());
    CHECK(to_json(asym)["x_eff"].is_null());
}
