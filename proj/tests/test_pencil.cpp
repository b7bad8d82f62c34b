#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "collar/eigen.hpp"
#include "collar/errors.hpp"
#include "collar/pencil.hpp"
#include "testutil.hpp"

#include <cmath>
#include <sstream>

using namespace collar;

namespace {

WarpedFamily flat_family(double T = M_PI / 2) {
    WarpedFamily f;
    f.profile = make_constant_profile(1.0);
    f.exp = {0.0, 0.0, 1};
    f.fiber_spectrum = {{0.0, 1}, {1.0, 2}};
    f.halfwidth = T;
    f.boundary = Boundary::Dirichlet;
    return f;
}

WarpedFamily hyperbolic_family() {
    WarpedFamily f;
    f.profile = make_sqrt_profile();
    f.exp = {-1.0, 1.0, 1};
    f.fiber_spectrum = circle_fiber(1.0, 3);
    f.halfwidth = 1.0;
    f.boundary = Boundary::Dirichlet;
    return f;
}

} // namespace

TEST_CASE("make_grid node counts and symmetry") {
    {
        auto g = make_grid(1.0, 0.1, {101, 50.0, 2'000'000});
        CHECK(g.nodes.size() == 501);
        CHECK(g.nodes[250] == 0.0);
    }
    {
        auto g = make_grid(1.0, 1.0, {101, 50.0, 2'000'000});
        CHECK(g.nodes.size() == 101); // floor case: n_min wins
    }
    {
        auto g = make_grid(1.0, 0.01, {101, 50.0, 2'000'000});
        CHECK(g.nodes.size() == 5001);
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            CHECK(g.nodes[i] == -g.nodes[g.nodes.size() - 1 - i]);
        CHECK(g.nodes.front() == -1.0);
        CHECK(g.nodes.back() == 1.0);
    }
    CHECK_THROWS_AS(make_grid(1.0, 1e-9, {101, 50.0, 2'000'000}), NumericalError);
    CHECK_THROWS_AS(make_grid(0.0, 0.1, {}), DomainError);
}

TEST_CASE("flat pencil: constant potential shifts A by mu*B exactly") {
    auto fam = flat_family();
    auto grid = make_grid(fam.halfwidth, 0.5, {51, 10, 1000});
    auto a0 = assemble(fam, 0.0, 0.5, grid);
    auto a7 = assemble(fam, 7.0, 0.5, grid);
    for (int i = 0; i < a0.order(); ++i) {
        CHECK(a7.diag[i] == doctest::Approx(a0.diag[i] + 7.0 * a0.weight[i]).epsilon(1e-15));
        CHECK(a7.weight[i] == a0.weight[i]);
    }
}

TEST_CASE("flat pencil eigenvalues are k^2 (and k^2 + mu)") {
    auto fam = flat_family();
    GridPolicy pol{4001, 0.0, 5000};
    auto grid = make_grid(fam.halfwidth, 1.0, pol);
    REQUIRE(grid.nodes.size() == 4001);
    for (double mu : {0.0, 7.0}) {
        auto p = assemble(fam, mu, 1.0, grid);
        auto res = lowest_eigenpairs(p, 3, {});
        for (int k = 1; k <= 3; ++k) {
            const double exact = k * k + mu;
            CHECK(std::abs(res.pairs[k - 1].lambda - exact) / exact <= 1e-5);
        }
    }
}

TEST_CASE("hyperbolic pencil: manufactured solution residual is second order") {
    auto fam = hyperbolic_family();
    const double eps = 0.3, mu = 4.0 * M_PI * M_PI;
    double prev = 0.0;
    std::vector<double> res_at;
    for (int n : {501, 1001, 2001}) {
        auto grid = make_grid(1.0, 1.0, {n, 0.0, n + 1});
        auto p = assemble(fam, mu, eps, grid);
        const double h = grid.spacing;
        const int m = p.order();
        double worst = 0.0;
        for (int i = 1; i + 1 < m; ++i) {
            const double t = p.positions[i];
            const double um = std::cos(p.positions[i - 1]);
            const double uc = std::cos(t);
            const double up = std::cos(p.positions[i + 1]);
            const double row = p.diag[i] * uc + p.off[i - 1] * um + p.off[i] * up;
            const double r2 = eps * eps + t * t;
            const double exact = 2.0 * t * std::sin(t) + r2 * std::cos(t) + mu * std::cos(t) / r2;
            worst = std::max(worst, std::abs(row / h - exact));
        }
        res_at.push_back(worst);
        prev = worst;
    }
    (void)prev;
    const double order1 = std::log2(res_at[0] / res_at[1]);
    const double order2 = std::log2(res_at[1] / res_at[2]);
    CHECK(0.5 * (order1 + order2) >= 1.9);
}

TEST_CASE("hyperbolic case has unit weight (a+bd=0)") {
    auto fam = hyperbolic_family();
    auto grid = make_grid(1.0, 0.2, {201, 0.0, 400});
    auto p = assemble(fam, 0.0, 0.2, grid);
    for (double w : p.weight)
        CHECK(w == doctest::Approx(grid.spacing).epsilon(1e-15));
}

TEST_CASE("derivative pencil: zero for constant profile, FD cross-check otherwise") {
    {
        auto fam = flat_family();
        auto grid = make_grid(fam.halfwidth, 0.5, {51, 10, 1000});
        auto dp = assemble_derivative(fam, 3.0, 0.5, grid);
        for (int i = 0; i < dp.order(); ++i) {
            CHECK(dp.diag[i] == 0.0);
            CHECK(dp.weight[i] == 0.0);
        }
    }
    {
        auto fam = hyperbolic_family();
        const double eps = 0.17, mu = 4.0 * M_PI * M_PI;
        auto grid = make_grid(1.0, eps, {401, 0.0, 1000});
        auto dp = assemble_derivative(fam, mu, eps, grid);
        const double de = 1e-5 * eps;
        auto ap = assemble(fam, mu, eps + de, grid);
        auto am = assemble(fam, mu, eps - de, grid);
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i < dp.order(); ++i) {
            worst = std::max(worst, std::abs(dp.diag[i] - (ap.diag[i] - am.diag[i]) / (2 * de)));
            worst = std::max(worst, std::abs(dp.weight[i] - (ap.weight[i] - am.weight[i]) / (2 * de)));
            scale = std::max(scale, std::abs(dp.diag[i]));
            if (i + 1 < dp.order()) {
                worst = std::max(worst, std::abs(dp.off[i] - (ap.off[i] - am.off[i]) / (2 * de)));
            }
        }
        CHECK(worst / scale <= 1e-6);
    }
}

TEST_CASE("Neumann pencil: constants are in the kernel") {
    auto fam = hyperbolic_family();
    fam.boundary = Boundary::Neumann;
    auto grid = make_grid(1.0, 0.2, {201, 0.0, 400});
    auto p = assemble(fam, 0.0, 0.2, grid);
    // A * 1 = 0 row-wise
    for (int i = 0; i < p.order(); ++i) {
        double row = p.diag[i];
        if (i > 0)
            row += p.off[i - 1];
        if (i + 1 < p.order())
            row += p.off[i];
        CHECK(std::abs(row) <= 1e-12 * std::abs(p.diag[i]));
    }
}

TEST_CASE("pencil is positive semidefinite for mu >= 0") {
    auto fam = hyperbolic_family();
    auto grid = make_grid(1.0, 0.2, {201, 0.0, 400});
    for (double mu : {0.0, fam.mu1()}) {
        auto p = assemble(fam, mu, 0.2, grid);
        CHECK(sturm_count_below(p, 0.0) == 0);
    }
}

TEST_CASE("eigenvalues increase with mu (min-max)") {
    auto fam = hyperbolic_family();
    auto grid = make_grid(1.0, 0.3, {101, 0.0, 400});
    auto lo = testutil::dense_pencil_eigenvalues(assemble(fam, 1.0, 0.3, grid));
    auto hi = testutil::dense_pencil_eigenvalues(assemble(fam, 1.5, 0.3, grid));
    for (std::size_t i = 0; i < lo.size(); ++i)
        CHECK(hi[i] > lo[i]);
}

TEST_CASE("overflow guard") {
    WarpedFamily fam;
    fam.profile = make_sqrt_profile();
    fam.exp = {0.0, 60.0, 1};
    fam.fiber_spectrum = {{0.0, 1}, {1.0, 1}};
    fam.halfwidth = 1.0;
    auto grid = make_grid(1.0, 1e-6, {101, 0.0, 200});
    CHECK_THROWS_AS(assemble(fam, 1.0, 1e-6, grid), NumericalError);
}

TEST_CASE("fiber enumerators") {
    auto c = circle_fiber(1.0, 5);
    REQUIRE(c.size() == 6);
    CHECK(c[0].mu == 0.0);
    CHECK(c[0].multiplicity == 1);
    CHECK(c[1].mu == doctest::Approx(4.0 * M_PI * M_PI));
    CHECK(c[1].multiplicity == 2);
    CHECK(c[5].mu == doctest::Approx(100.0 * M_PI * M_PI));

    auto t = torus2_fiber(1.0, 5);
    // sums 0,1,2,4,5 with counts 1,4,4,4,8
    REQUIRE(t.size() == 5);
    CHECK(t[0].multiplicity == 1);
    CHECK(t[1].mu == doctest::Approx(4.0 * M_PI * M_PI));
    CHECK(t[1].multiplicity == 4);
    CHECK(t[4].mu == doctest::Approx(4.0 * M_PI * M_PI * 5.0));
    CHECK(t[4].multiplicity == 8);
}

TEST_CASE("family validation") {
    auto fam = hyperbolic_family();
    fam.fiber_spectrum = {{1.0, 1}};
    CHECK_THROWS_AS(fam.validate(), DomainError);
    fam = hyperbolic_family();
    fam.halfwidth = 0.0;
    CHECK_THROWS_AS(fam.validate(), DomainError);
    fam = hyperbolic_family();
    fam.fiber_spectrum = {{0.0, 1}, {2.0, 1}, {1.0, 1}};
    CHECK_THROWS_AS(fam.validate(), DomainError);
}

TEST_CASE("pencil text dump has three columns per row") {
    auto fam = flat_family();
    auto grid = make_grid(fam.halfwidth, 0.5, {51, 10, 1000});
    auto p = assemble(fam, 0.0, 0.5, grid);
    std::ostringstream os;
    write_pencil(os, p);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header.front() == '#');
    int rows = 0;
    double a, b, c;
    while (is >> a >> b >> c)
        ++rows;
    CHECK(rows == p.order());
}
