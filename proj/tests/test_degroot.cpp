#include "spectral_econ/degroot.hpp"
#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace spectral_econ;
using namespace spectral_econ::degroot;

namespace {

Matrix column(std::initializer_list<double> v) {
    Matrix x(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double e : v) x(i++, 0) = e;
    return x;
}

// Dense positive rows: primitive with a comfortable spectral gap.
StochasticMatrix random_primitive(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = u(rng);
    return StochasticMatrix::normalize_rows(SquareMatrix(a));
}

double second_modulus(const Matrix& m) {
    auto ev = eigenvalues(SquareMatrix(m));
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) > std::abs(b); });
    return std::abs(ev[1]);
}

}  // namespace

TEST_CASE("stochastic matrix validation") {
    CHECK_THROWS_AS(StochasticMatrix(SquareMatrix{{0.5, 0.4}, {0.5, 0.5}}), InvalidInput);
    CHECK_THROWS_AS(StochasticMatrix(SquareMatrix{{1.5, -0.5}, {0.5, 0.5}}), InvalidInput);
    const auto n = StochasticMatrix::normalize_rows(SquareMatrix{{1, 3}, {2, 2}});
    CHECK(n.entries()(0, 1) == 0.75);
    CHECK_THROWS_AS(StochasticMatrix::normalize_rows(SquareMatrix{{0, 0}, {1, 1}}), InvalidInput);
}

TEST_CASE("simulate examples") {
    const StochasticMatrix half(SquareMatrix{{0.5, 0.5}, {0.5, 0.5}});
    const auto a = simulate(half, column({0, 1}));
    CHECK(a.converged);
    CHECK(a.steps == 1);
    REQUIRE(a.consensus);
    CHECK((*a.consensus)[0] == 0.5);

    const StochasticMatrix swap(SquareMatrix{{0, 1}, {1, 0}});
    SimulateOptions o;
    o.t_max = 1000;
    const auto b = simulate(swap, column({0, 1}), o);
    CHECK_FALSE(b.converged);
    CHECK_FALSE(b.consensus.has_value());
    CHECK(b.steps == 1000);

    const StochasticMatrix chain(SquareMatrix{{2.0 / 3, 1.0 / 3}, {0.25, 0.75}});
    const auto c = simulate(chain, column({0, 1}));
    REQUIRE(c.consensus);
    CHECK((*c.consensus)[0] == doctest::Approx(4.0 / 7).epsilon(1e-9));
}

TEST_CASE("trajectory stores exact iterates at the configured stride") {
    std::mt19937_64 rng(1);
    const auto m = random_primitive(rng, 6);
    Matrix x0 = Matrix::Random(6, 2);
    SimulateOptions o;
    o.stride = 3;
    o.tol = 1e-12;
    const auto traj = simulate(m, x0, o);
    REQUIRE(traj.states.size() >= 2);
    CHECK(traj.states.front().t == 0);
    CHECK(traj.states.back().t == traj.steps);
    Matrix x = x0;
    long t = 0;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        while (t < traj.states[k].t) {
            x = m.entries() * x;
            ++t;
        }
        CHECK(x == traj.states[k].state);
        if (k + 1 < traj.states.size()) CHECK(traj.states[k].t % 3 == 0);
    }
    REQUIRE(traj.converged);
    const Matrix& last = traj.states.back().state;
    for (Eigen::Index i = 0; i < last.rows(); ++i) {
        CHECK((last.row(i).transpose() - *traj.consensus).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("consensus value and the power-limit oracle") {
    const StochasticMatrix chain(SquareMatrix{{2.0 / 3, 1.0 / 3}, {0.25, 0.75}});
    CHECK(consensus_value(chain, column({7, 0}))[0] == doctest::Approx(3.0).epsilon(1e-12));
    const auto uniform = uniform_matrix(5);
    CHECK(consensus_value(uniform, column({1, 2, 3, 4, 5}))[0] == doctest::Approx(3.0));

    CHECK_THROWS_AS(consensus_value(StochasticMatrix(SquareMatrix{{0, 1}, {1, 0}}), column({0, 1})),
                    PreconditionViolation);
    CHECK_THROWS_AS(consensus_value(StochasticMatrix(SquareMatrix{{1, 0}, {0.5, 0.5}}), column({0, 1})),
                    PreconditionViolation);

    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + rep % 19;
        const auto m = random_primitive(rng, n);
        const Matrix x0 = Matrix::Random(n, 1);
        const auto traj = simulate(m, x0);
        REQUIRE(traj.converged);
        const Vector a = consensus_value(m, x0);
        CHECK(std::abs((*traj.consensus)[0] - a[0]) <= 1e-8);

        const Vector c = influence_weights(m).scores;
        const Matrix limit = oracle::stochastic_power(m.entries(), 6);  // M^64
        const Matrix target = Vector::Ones(n) * c.transpose();
        if (second_modulus(m.entries()) <= 0.8) {
            CHECK((limit - target).cwiseAbs().rowwise().sum().maxCoeff() <= 1e-6);
        }
    }
}

TEST_CASE("influence weights") {
    const StochasticMatrix doubly(SquareMatrix{{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}});
    for (int i = 0; i < 3; ++i) CHECK(influence_weights(doubly).scores[i] == doctest::Approx(1.0 / 3));
    // everyone listens to node 1 with weight 1/2 and to themselves with weight 1/2
    Matrix star = 0.5 * Matrix::Identity(4, 4);
    star.col(0).array() += 0.5;
    star.row(0).setConstant(0.5 / 3);
    star(0, 0) = 0.5;
    const auto w = influence_weights(StochasticMatrix(SquareMatrix(star)));
    Eigen::Index top = 0;
    w.scores.maxCoeff(&top);
    CHECK(top == 0);
}

TEST_CASE("prominence") {
    const StochasticMatrix swap(SquareMatrix{{0, 1}, {1, 0}});
    CHECK(prominence_check(swap, {0}, 0.5, 10) == 1L);
    // the celebrity listens to nobody in particular, everyone listens to the celebrity
    const StochasticMatrix star(SquareMatrix{{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.9, 0.1, 0}, {0.9, 0, 0.1}});
    CHECK(prominence_check(star, {0}, 0.8, 10) == 1L);
    CHECK_FALSE(prominence_check(star, {1}, 0.2, 1).has_value());
    const auto uniform = uniform_matrix(4);
    CHECK_FALSE(prominence_check(uniform, {0}, 0.5, 50).has_value());
    const StochasticMatrix chain(SquareMatrix{{0.5, 0.5, 0}, {0.25, 0.5, 0.25}, {0, 0.5, 0.5}});
    CHECK(prominence_check(chain, {0, 1}, 1e-3, 10) == 1L);
    CHECK_THROWS_AS(prominence_check(chain, {}, 0.1, 10), InvalidInput);
    CHECK_THROWS_AS(prominence_check(chain, {0, 1, 2}, 0.1, 10), InvalidInput);
}

TEST_CASE("opinion range contracts for primitive matrices") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 3 + rep;
        const auto m = random_primitive(rng, n);
        Matrix x = Matrix::Random(n, 1);
        double range = x.maxCoeff() - x.minCoeff();
        for (int t = 0; t < 40; ++t) {
            x = m.entries() * x;
            const double next = x.maxCoeff() - x.minCoeff();
            CHECK(next <= range + 1e-15);
            range = next;
        }
    }
}

TEST_CASE("affine equivariance of trajectories") {
    std::mt19937_64 rng(4);
    const auto m = random_primitive(rng, 5);
    const Matrix x0 = Matrix::Random(5, 1);
    SimulateOptions o;
    o.t_max = 30;
    o.tol = 1e-300;
    const auto base = simulate(m, x0, o);
    const auto moved = simulate(m, (2.5 * x0).array() + 1.0, o);
    REQUIRE(base.states.size() == moved.states.size());
    for (std::size_t k = 0; k < base.states.size(); ++k) {
        const Matrix expect = (2.5 * base.states[k].state).array() + 1.0;
        CHECK((moved.states[k].state - expect).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("wisdom trends") {
    const std::vector<std::size_t> sizes{10, 20, 40, 80};
    const auto uni = wisdom_trend(uniform_sequence(sizes));
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        CHECK(uni[i].max_influence == doctest::Approx(1.0 / static_cast<double>(sizes[i])));
    }
    const auto celeb = wisdom_trend(celebrity_sequence(sizes), 2);
    for (const auto& p : celeb) CHECK(p.max_influence >= 0.45);

    const auto er = wisdom_trend(erdos_renyi_sequence({20, 40, 80, 160}, 10), 2);
    for (std::size_t i = 1; i < er.size(); ++i) CHECK(er[i].max_influence < er[i - 1].max_influence);
}

TEST_CASE("celebrity family has a single-node prominent set at every size") {
    for (std::size_t n : {10, 20, 40}) {
        CHECK(prominence_check(celebrity_matrix(n), {0}, 0.4, 5).has_value());
    }
}

TEST_CASE("crowd wisdom experiment") {
    const auto uniform = uniform_matrix(100);
    const auto r = crowd_wisdom_experiment(uniform, 5.0, 2.0, 10000, 3, 2);
    CHECK(r.theoretical_sd == doctest::Approx(0.2).epsilon(1e-12));
    // standard error of a sample sd is about sd / sqrt(2 (N - 1))
    const double se = r.theoretical_sd / std::sqrt(2.0 * 9999);
    CHECK(std::abs(r.consensus_sd - r.theoretical_sd) <= 3 * se);

    const auto celeb = crowd_wisdom_experiment(celebrity_matrix(50), 0.0, 1.0, 2000, 5, 1);
    CHECK(celeb.theoretical_sd >= 0.4);

    const auto one = crowd_wisdom_experiment(celebrity_matrix(20), 0.0, 1.0, 500, 77, 1);
    const auto four = crowd_wisdom_experiment(celebrity_matrix(20), 0.0, 1.0, 500, 77, 4);
    CHECK(one.consensus_sd == four.consensus_sd);
}

TEST_CASE("trajectory exports") {
    const StochasticMatrix half(SquareMatrix{{0.5, 0.5}, {0.5, 0.5}});
    const auto traj = simulate(half, column({0, 1}));
    const std::string csv = trajectory_to_csv(traj);
    CHECK(csv.rfind("t,node,dim,value\n0,1,1,0\n0,2,1,1\n1,1,1,0.5\n", 0) == 0);
    const Json j = to_json(traj);
    CHECK(j["converged"] == true);
    CHECK(j["steps"] == 1);
}
