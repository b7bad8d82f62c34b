#include "collar/oracles.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace collar {

double flat_torus_lambda(double eps, int m, int n) {
    const double pi2 = 4.0 * M_PI * M_PI;
    return pi2 * (double(m) * m / (eps * eps) + double(n) * n * eps * eps);
}

std::vector<TorusBranch> flat_torus_branches(double eps, int max_index) {
    if (!(eps > 0.0) || max_index < 0)
        throw DomainError("flat_torus_branches: need eps > 0, max_index >= 0");
    std::vector<TorusBranch> out;
    out.reserve(std::size_t(2 * max_index + 1) * std::size_t(2 * max_index + 1));
    for (int m = -max_index; m <= max_index; ++m)
        for (int n = -max_index; n <= max_index; ++n)
            out.push_back({m, n, flat_torus_lambda(eps, m, n)});
    return out;
}

std::vector<double> flat_torus_ordered(double eps, int max_index, int count) {
    auto all = flat_torus_branches(eps, max_index);
    std::vector<double> vals;
    for (const auto& b : all)
        if (b.m != 0 || b.n != 0)
            vals.push_back(b.lambda);
    std::sort(vals.begin(), vals.end());
    if (count < static_cast<int>(vals.size()))
        vals.resize(count);
    return vals;
}

PencilFamily flat_torus_pencil_family(std::vector<std::pair<int, int>> modes) {
    if (modes.empty())
        throw DomainError("flat_torus_pencil_family: empty mode list");
    return [modes](double eps) {
        const int n = static_cast<int>(modes.size());
        const double pi2 = 4.0 * M_PI * M_PI;
        PencilSample s;
        for (auto* p : {&s.op, &s.dop}) {
            p->off.assign(n - 1, 0.0);
            p->positions.resize(n);
            p->eps = eps;
            p->halfwidth = double(n);
            p->boundary = Boundary::Neumann; // no virtual zero knots
            p->family_id = "flat-torus";
        }
        s.op.diag.resize(n);
        s.op.weight.assign(n, 1.0);
        s.dop.diag.resize(n);
        s.dop.weight.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            const auto [m, k] = modes[i];
            s.op.diag[i] = flat_torus_lambda(eps, m, k);
            s.dop.diag[i] = pi2 * (-2.0 * double(m) * m / (eps * eps * eps) +
                                   2.0 * double(k) * k * eps);
            s.op.positions[i] = s.dop.positions[i] = double(i);
        }
        return s;
    };
}

PencilFamily avoided_crossing_family(double delta) {
    if (delta < 0.0)
        throw DomainError("avoided_crossing_family: delta must be >= 0");
    return [delta](double eps) {
        PencilSample s;
        for (auto* p : {&s.op, &s.dop}) {
            p->positions = {0.0, 1.0};
            p->eps = eps;
            p->halfwidth = 1.0;
            p->boundary = Boundary::Neumann;
            p->family_id = "avoided-crossing";
        }
        s.op.diag = {eps, 1.0 - eps};
        s.op.off = {delta};
        s.op.weight = {1.0, 1.0};
        s.dop.diag = {1.0, -1.0};
        s.dop.off = {0.0};
        s.dop.weight = {0.0, 0.0};
        return s;
    };
}

double avoided_crossing_lambda(double eps, double delta, int branch) {
    const double half = 0.5 * std::sqrt((1.0 - 2.0 * eps) * (1.0 - 2.0 * eps) + 4.0 * delta * delta);
    return branch == 0 ? 0.5 - half : 0.5 + half;
}

double crossing_analytic_lambda(double eps, int branch) {
    return branch == 0 ? eps : 1.0 - eps;
}

std::vector<double> flat_sturm_liouville(double mu, Boundary bc, int count) {
    if (mu < 0.0 || count < 0)
        throw DomainError("flat_sturm_liouville: need mu >= 0, count >= 0");
    std::vector<double> out;
    const int k0 = bc == Boundary::Dirichlet ? 1 : 0;
    for (int k = k0; static_cast<int>(out.size()) < count; ++k)
        out.push_back(double(k) * k + mu);
    return out;
}

} // namespace collar
