#include "spectral_econ/centrality.hpp"
#include "spectral_econ/error.hpp"
#include "spectral_econ/matrix_core.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace spectral_econ;

namespace {

// Exact Figure 1 Katz-Bonacich values at delta = 1/3, z = 1.
const double kFig1Katz[7] = {33.0 / 8, 33.0 / 8, 21.0 / 4, 9.0 / 2, 21.0 / 4, 33.0 / 8, 33.0 / 8};

}  // namespace

TEST_CASE("degree centrality") {
    const auto g = oracle::fig1_graph();
    for (auto dir : {DegreeDirection::in, DegreeDirection::out, DegreeDirection::undirected}) {
        const auto r = degree_centrality(g, dir);
        CHECK(r.scores[0] == 2);
        CHECK(r.scores[2] == 3);
        CHECK(r.scores[3] == 2);
        CHECK(r.normalization == "raw");
    }
    CHECK(degree_centrality(SquareMatrix::zeros(4), DegreeDirection::out).scores.isZero());
    const SquareMatrix w{{0, 2}, {0, 0}};
    CHECK(degree_centrality(w, DegreeDirection::out).scores == Vector((Vector(2) << 2, 0).finished()));
    CHECK(degree_centrality(w, DegreeDirection::in).scores == Vector((Vector(2) << 0, 2).finished()));
    CHECK(degree_centrality(w, DegreeDirection::undirected).scores == Vector::Ones(2));
    CHECK_THROWS_AS(degree_centrality(SquareMatrix{{0, -1}, {1, 0}}, DegreeDirection::out), InvalidInput);
}

TEST_CASE("eigenvector centrality examples") {
    const auto two = eigenvector_centrality(SquareMatrix{{0, 1}, {1, 0}});
    CHECK(two.scores[0] == doctest::Approx(0.5));
    const auto chain = eigenvector_centrality(SquareMatrix{{2.0 / 3, 1.0 / 3}, {0.25, 0.75}});
    CHECK(chain.scores[0] == doctest::Approx(3.0 / 7).epsilon(1e-12));
    CHECK(chain.scores[1] == doctest::Approx(4.0 / 7).epsilon(1e-12));

    const auto fig = eigenvector_centrality(oracle::fig1_graph());
    const double top = fig.scores.maxCoeff();
    std::vector<int> argmax;
    for (int i = 0; i < 7; ++i)
        if (std::abs(fig.scores[i] - top) <= 1e-12) argmax.push_back(i + 1);
    CHECK(argmax == std::vector<int>{3, 5});
    CHECK(fig.scores.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fig.scores.minCoeff() > 0);

    try {
        eigenvector_centrality(SquareMatrix{{1, 1}, {0, 1}});
        FAIL("reducible input must throw");
    } catch (const PreconditionViolation& e) {
        CHECK(std::string(e.what()).find("strongly connected") != std::string::npos);
    }
}

TEST_CASE("eigenvector equation residual") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        const Matrix a = oracle::random_irreducible(rng, 2 + rep, 0.2);
        const auto c = eigenvector_centrality(SquareMatrix(a)).scores;
        const double lambda = spectral_radius(SquareMatrix(a));
        CHECK((lambda * c - a.transpose() * c).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, lambda));
    }
}

TEST_CASE("katz-bonacich on figure 1 equals exact rationals") {
    const auto k = katz_bonacich(oracle::fig1_graph(), 1.0 / 3);
    for (int i = 0; i < 7; ++i) CHECK(k.scores[i] == doctest::Approx(kFig1Katz[i]).epsilon(1e-13));
    REQUIRE(k.params);
    CHECK(k.params->delta == 1.0 / 3);
    CHECK(k.params->z == Vector::Ones(7));
}

TEST_CASE("katz-bonacich small examples") {
    const SquareMatrix two{{0, 1}, {1, 0}};
    const auto k = katz_bonacich(two, 0.5, (Vector(2) << 1, 0).finished());
    CHECK(k.scores[0] == doctest::Approx(4.0 / 3));
    CHECK(k.scores[1] == doctest::Approx(2.0 / 3));
    const Vector z = (Vector(2) << 0.3, 0.7).finished();
    CHECK(katz_bonacich(two, 0.0, z).scores == z);
    CHECK_THROWS_AS(katz_bonacich(two, 1.0, z), DivergenceError);
}

TEST_CASE("katz-bonacich is the left-convention walk sum") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int rep = 0; rep < 12; ++rep) {
        const int n = 3 + rep % 3;
        Matrix a = oracle::random_irreducible(rng, n, 0.2);
        // asymmetric on purpose so the orientation matters
        const SquareMatrix m(a);
        const double delta = 0.3 / spectral_radius(m);
        Vector z(n);
        for (int i = 0; i < n; ++i) z[i] = u(rng);
        const Vector k = katz_bonacich(m, delta, z).scores;
        const Vector walks = oracle::walk_sum(a, z, delta, 8);
        CHECK((k - walks).cwiseAbs().maxCoeff() <= 1e-4 * k.maxCoeff());
        CHECK(k.minCoeff() >= z.minCoeff());
        const Vector kt = katz_bonacich(m, delta, z, Orientation::transposed).scores;
        const Vector walks_t = oracle::walk_sum(a.transpose(), z, delta, 8);
        CHECK((kt - walks_t).cwiseAbs().maxCoeff() <= 1e-4 * kt.maxCoeff());
    }
}

TEST_CASE("katz-bonacich scale equivariance and edge monotonicity") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 15; ++rep) {
        const int n = 3 + rep;
        Matrix a = oracle::random_irreducible(rng, n, 0.15);
        const SquareMatrix m(a);
        const double delta = 0.5 / spectral_radius(m);
        const Vector z = Vector::Ones(n);
        const Vector k = katz_bonacich(m, delta, z).scores;
        CHECK((katz_bonacich(m, delta, 3.5 * z).scores - 3.5 * k).norm() <= 1e-12 * k.norm());

        Matrix denser = a;
        denser(rep % n, (rep + 2) % n) += 0.05;
        const SquareMatrix md(denser);
        if (delta * spectral_radius(md) < 1) {
            const Vector kd = katz_bonacich(md, delta, z).scores;
            CHECK((kd - k).minCoeff() >= -1e-12);
        }
    }
}

TEST_CASE("katz-bonacich is invariant under the mirror automorphism of figure 1") {
    const int perm[7] = {5, 6, 4, 3, 2, 0, 1};  // 1<->6, 2<->7, 3<->5
    const auto g = oracle::fig1_graph();
    Matrix p = Matrix::Zero(7, 7);
    for (int i = 0; i < 7; ++i) p(perm[i], i) = 1;
    const SquareMatrix relabeled(p * g.entries() * p.transpose());
    CHECK(relabeled == g);
    const Vector k = katz_bonacich(g, 0.4).scores;
    for (int i = 0; i < 7; ++i) CHECK(k[perm[i]] == doctest::Approx(k[i]).epsilon(1e-13));
}

TEST_CASE("rescaled katz-bonacich converges to eigenvector centrality") {
    const auto g = oracle::fig1_graph();
    const double rho = spectral_radius(g);
    const auto pts = kb_eigenvector_limit(g, Vector::Ones(7), {0.5 / rho, 0.9 / rho, 0.99 / rho, 0.999 / rho});
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].cosine_to_eigenvector > pts[i - 1].cosine_to_eigenvector);
    }
    CHECK(pts.back().cosine_to_eigenvector >= 0.999);
    CHECK(pts[0].cosine_to_eigenvector == doctest::Approx(0.99819).epsilon(1e-5));
    CHECK(pts.back().rescaled.sum() == doctest::Approx(1.0));

    const auto two = kb_eigenvector_limit(SquareMatrix{{0, 1}, {1, 0}}, Vector::Ones(2), {0.2, 0.7});
    for (const auto& p : two) {
        CHECK(p.rescaled[0] == 0.5);
        CHECK(p.rescaled[1] == 0.5);
    }
}

TEST_CASE("centrality json round-trip and csv") {
    const auto k = katz_bonacich(oracle::fig1_graph(), 1.0 / 3);
    const auto back = centrality_from_json(Json::parse(dump_json(to_json(k))));
    CHECK(back.scores == k.scores);
    CHECK(back.kind == CentralityKind::katz_bonacich);
    REQUIRE(back.params);
    CHECK(back.params->delta == k.params->delta);
    const std::string csv = to_csv(k);
    CHECK(csv.rfind("node,score\n1,4.125", 0) == 0);
}
