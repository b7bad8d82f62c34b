#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "collar/eigen.hpp"
#include "collar/errors.hpp"
#include "collar/pencil.hpp"
#include "collar/profiles.hpp"
#include "testutil.hpp"

#include <cmath>

using namespace collar;

namespace {

OperatorPencil flat_dirichlet_pencil(int n_nodes) {
    WarpedFamily f;
    f.profile = make_constant_profile(1.0);
    f.exp = {0.0, 0.0, 1};
    f.fiber_spectrum = {{0.0, 1}, {1.0, 1}};
    f.halfwidth = M_PI / 2;
    auto grid = make_grid(f.halfwidth, 1.0, {n_nodes, 0.0, n_nodes + 1});
    return assemble(f, 0.0, 1.0, grid);
}

} // namespace

TEST_CASE("flat spectrum k^2 to 1e-5 at n = 4001") {
    auto p = flat_dirichlet_pencil(4001);
    auto res = lowest_eigenpairs(p, 3, {});
    const double exact[] = {1.0, 4.0, 9.0};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(res.pairs[i].lambda - exact[i]) / exact[i] <= 1e-5);
        CHECK(res.pairs[i].residual <= 1e-8);
    }
}

TEST_CASE("2x2 closed form") {
    OperatorPencil p;
    p.diag = {2.0, 2.0};
    p.off = {1.0};
    p.weight = {1.0, 1.0};
    p.positions = {0.0, 1.0};
    auto res = lowest_eigenpairs(p, 2, {});
    CHECK(res.pairs[0].lambda == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.pairs[1].lambda == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("random tridiagonal matches dense Jacobi oracle") {
    for (std::uint64_t seed : {7ull, 99ull}) {
        auto p = testutil::synthetic_tridiag(50, seed);
        auto dense = testutil::dense_pencil_eigenvalues(p);
        auto res = lowest_eigenpairs(p, 50, {1e-13, 1e-12, 8, {}});
        for (int i = 0; i < 50; ++i)
            CHECK(std::abs(res.pairs[i].lambda - dense[i]) /
                      std::max(1.0, std::abs(dense[i])) <=
                  1e-12);
    }
}

TEST_CASE("generalized pencil with nontrivial B matches oracle") {
    auto p = testutil::synthetic_tridiag(60, 1234);
    testutil::Lcg rng(42);
    for (auto& w : p.weight)
        w = 0.2 + 0.15 * (rng.uniform() + 1.0); // positive, nonuniform
    auto dense = testutil::dense_pencil_eigenvalues(p);
    auto res = lowest_eigenpairs(p, 10, {1e-13, 1e-12, 8, {}});
    for (int i = 0; i < 10; ++i)
        CHECK(res.pairs[i].lambda == doctest::Approx(dense[i]).epsilon(1e-12));

    // B-orthonormality of the returned set
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j <= i; ++j) {
            double g = 0.0;
            for (int q = 0; q < p.order(); ++q)
                g += res.pairs[i].vector[q] * p.weight[q] * res.pairs[j].vector[q];
            CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-10);
        }
}

TEST_CASE("Sturm counts are monotone and total n") {
    auto p = testutil::synthetic_tridiag(40, 5);
    int prev = 0;
    for (double x = -2.0; x <= 10.0; x += 0.25) {
        const int c = sturm_count_below(p, x);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(sturm_count_below(p, 1e9) == 40);
    CHECK(sturm_count_below(p, -1e9) == 0);
}

TEST_CASE("ascending order and cluster gaps") {
    auto p = testutil::synthetic_tridiag(80, 21);
    auto res = lowest_eigenpairs(p, 12, {});
    for (int i = 1; i < 12; ++i)
        CHECK(res.pairs[i].lambda >= res.pairs[i - 1].lambda);
    for (int i = 0; i < 12; ++i)
        CHECK(res.pairs[i].cluster_gap > 0.0);
}

TEST_CASE("exact degeneracy: cluster flagged, orthonormal basis returned") {
    // diagonal pencil with a double eigenvalue
    OperatorPencil p;
    p.diag = {2.0, 2.0, 5.0, 7.0};
    p.off = {0.0, 0.0, 0.0};
    p.weight = {1.0, 1.0, 1.0, 1.0};
    p.positions = {0, 1, 2, 3};
    auto res = lowest_eigenpairs(p, 3, {});
    REQUIRE(res.clusters.size() == 1);
    CHECK(res.clusters[0] == std::pair<int, int>{0, 2});
    CHECK(res.pairs[0].lambda == doctest::Approx(2.0));
    CHECK(res.pairs[1].lambda == doctest::Approx(2.0));
    CHECK(res.pairs[2].lambda == doctest::Approx(5.0));
    double g01 = 0.0;
    for (int q = 0; q < 4; ++q)
        g01 += res.pairs[0].vector[q] * res.pairs[1].vector[q];
    CHECK(std::abs(g01) <= 1e-10);
    // both basis vectors live in span{e0, e1}
    CHECK(std::abs(res.pairs[0].vector[2]) + std::abs(res.pairs[0].vector[3]) <= 1e-8);
}

TEST_CASE("warm hints reproduce cold-start values") {
    auto p = testutil::synthetic_tridiag(300, 77);
    auto cold = lowest_eigenpairs(p, 5, {});
    SolveOptions warm;
    for (auto& q : cold.pairs)
        warm.hints.push_back(q.lambda * 1.01); // slightly off, as in continuation
    auto hot = lowest_eigenpairs(p, 5, warm);
    for (int i = 0; i < 5; ++i)
        CHECK(hot.pairs[i].lambda == doctest::Approx(cold.pairs[i].lambda).epsilon(1e-13));

    SolveOptions stale;
    stale.hints.assign(5, 1e6); // nonsense hints must fall back, not break
    auto fb = lowest_eigenpairs(p, 5, stale);
    for (int i = 0; i < 5; ++i)
        CHECK(fb.pairs[i].lambda == doctest::Approx(cold.pairs[i].lambda).epsilon(1e-13));
}

TEST_CASE("argument validation") {
    auto p = testutil::synthetic_tridiag(10, 3);
    CHECK_THROWS_AS(lowest_eigenpairs(p, 0, {}), DomainError);
    CHECK_THROWS_AS(lowest_eigenpairs(p, 11, {}), DomainError);
    p.weight[3] = 0.0;
    CHECK_THROWS_AS(lowest_eigenpairs(p, 2, {}), DomainError);
}
