#include "collar/pencil.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace collar {

void WarpedFamily::validate() const {
    if (!(halfwidth > 0.0))
        throw DomainError("family: halfwidth T must be positive");
    if (fiber_spectrum.empty() || fiber_spectrum.front().mu != 0.0)
        throw DomainError("family: fiber spectrum must start with mu_0 = 0");
    for (std::size_t i = 0; i < fiber_spectrum.size(); ++i) {
        if (fiber_spectrum[i].multiplicity < 1)
            throw DomainError("family: fiber multiplicities must be positive");
        if (i > 0 && !(fiber_spectrum[i].mu > fiber_spectrum[i - 1].mu))
            throw DomainError("family: fiber spectrum must be strictly ascending");
    }
}

double WarpedFamily::mu1() const {
    for (const auto& m : fiber_spectrum)
        if (m.mu > 0.0)
            return m.mu;
    throw DomainError("family: no nonzero fiber eigenvalue present");
}

std::vector<FiberMode> circle_fiber(double length, int max_mode) {
    if (!(length > 0.0) || max_mode < 0)
        throw DomainError("circle fiber: need length > 0 and max_mode >= 0");
    std::vector<FiberMode> out;
    const double k = 2.0 * M_PI / length;
    for (int n = 0; n <= max_mode; ++n)
        out.push_back({k * k * double(n) * double(n), n == 0 ? 1 : 2});
    return out;
}

std::vector<FiberMode> torus2_fiber(double side, int max_sum) {
    if (!(side > 0.0) || max_sum < 0)
        throw DomainError("torus fiber: need side > 0 and max_sum >= 0");
    std::map<long, int> counts; // p^2+q^2 -> lattice count
    const int r = static_cast<int>(std::sqrt(double(max_sum))) + 1;
    for (int p = -r; p <= r; ++p)
        for (int q = -r; q <= r; ++q) {
            const long s = long(p) * p + long(q) * q;
            if (s <= max_sum)
                ++counts[s];
        }
    const double k = 2.0 * M_PI / side;
    std::vector<FiberMode> out;
    for (auto [s, c] : counts)
        out.push_back({k * k * double(s), c});
    return out;
}

Grid make_grid(double T, double eps, const GridPolicy& policy) {
    if (!(T > 0.0) || !(eps > 0.0))
        throw DomainError("make_grid: need T > 0 and eps > 0");
    const double want = std::ceil(policy.points_per_eps * T / eps);
    if (want > double(policy.n_cap))
        throw NumericalError("make_grid: node count exceeds cap; eps too small for budget");
    long n = std::max(long(policy.n_min), long(want));
    if (n % 2 == 0)
        ++n;
    if (n > policy.n_cap)
        throw NumericalError("make_grid: node count exceeds cap; eps too small for budget");
    Grid g;
    g.nodes.resize(n);
    g.spacing = 2.0 * T / double(n - 1);
    for (long i = 0; i < n; ++i)
        g.nodes[i] = -T + double(i) * g.spacing;
    // enforce exact symmetry; midpoint is exactly 0
    for (long i = 0; i < n / 2; ++i)
        g.nodes[n - 1 - i] = -g.nodes[i];
    g.nodes[n / 2] = 0.0;
    return g;
}

namespace {

constexpr double kOverflowGuard = 1e300;

double checked(double v) {
    if (!std::isfinite(v) || std::abs(v) > kOverflowGuard)
        throw NumericalError("assemble: coefficient out of floating range");
    return v;
}

// rho^c and its eps-derivative c rho^{c-1} rho_eps, as one switchable kernel
// so value and derivative assembly share the sparsity pattern exactly.
struct PowField {
    const ProfileFunction& p;
    double eps;
    bool derivative;
    double operator()(double c, double t) const {
        const double r = p.eval(eps, t);
        if (!derivative)
            return checked(std::pow(r, c));
        if (c == 0.0)
            return 0.0;
        return checked(c * std::pow(r, c - 1.0) * p.d_eps(eps, t));
    }
};

OperatorPencil assemble_impl(const WarpedFamily& fam, double mu, double eps,
                             const Grid& grid, bool derivative) {
    fam.validate();
    if (!(eps > 0.0))
        throw DomainError("assemble: eps must be positive");
    if (mu < 0.0)
        throw DomainError("assemble: mu must be nonnegative");
    const auto& t = grid.nodes;
    const std::size_t n = t.size();
    if (n < 3)
        throw DomainError("assemble: grid too small");
    const double h = grid.spacing;
    const double a = fam.exp.a, b = fam.exp.b;
    const double fe = -a + b * fam.exp.d; // flux exponent
    const double we = a + b * fam.exp.d;  // weight exponent
    const double pe = we - 2.0 * b;       // weighted potential exponent

    PowField F{fam.profile, eps, derivative};

    std::vector<double> flux(n - 1); // rho^{fe} at midpoints, divided by h
    for (std::size_t i = 0; i + 1 < n; ++i)
        flux[i] = F(fe, 0.5 * (t[i] + t[i + 1])) / h;

    OperatorPencil out;
    out.eps = eps;
    out.mu = mu;
    out.halfwidth = fam.halfwidth;
    out.boundary = fam.boundary;
    out.family_id = fam.profile.name;

    if (fam.boundary == Boundary::Dirichlet) {
        const std::size_t m = n - 2;
        out.diag.resize(m);
        out.off.resize(m - 1);
        out.weight.resize(m);
        out.positions.assign(t.begin() + 1, t.end() - 1);
        for (std::size_t i = 0; i < m; ++i) {
            out.diag[i] = flux[i] + flux[i + 1] + mu * F(pe, t[i + 1]) * h;
            out.weight[i] = F(we, t[i + 1]) * h;
            if (i + 1 < m)
                out.off[i] = -flux[i + 1];
        }
    } else {
        out.diag.resize(n);
        out.off.resize(n - 1);
        out.weight.resize(n);
        out.positions = t;
        for (std::size_t i = 0; i < n; ++i) {
            const double cell = (i == 0 || i == n - 1) ? 0.5 * h : h;
            double d = mu * F(pe, t[i]) * cell;
            if (i > 0)
                d += flux[i - 1];
            if (i + 1 < n)
                d += flux[i];
            out.diag[i] = d;
            out.weight[i] = F(we, t[i]) * cell;
            if (i + 1 < n)
                out.off[i] = -flux[i];
        }
    }
    if (!derivative)
        for (double w : out.weight)
            if (!(w > 0.0))
                throw NumericalError("assemble: weight matrix not positive");
    return out;
}

} // namespace

OperatorPencil assemble(const WarpedFamily& fam, double mu, double eps, const Grid& grid) {
    return assemble_impl(fam, mu, eps, grid, false);
}

OperatorPencil assemble_derivative(const WarpedFamily& fam, double mu, double eps, const Grid& grid) {
    return assemble_impl(fam, mu, eps, grid, true);
}

void write_pencil(std::ostream& os, const OperatorPencil& p) {
    os << "# diag offdiag weight  (order " << p.order() << ", eps " << p.eps
       << ", mu " << p.mu << ")\n";
    char buf[128];
    for (int i = 0; i < p.order(); ++i) {
        const double off = i + 1 < p.order() ? p.off[i] : 0.0;
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.diag[i], off, p.weight[i]);
        os << buf;
    }
}

} // namespace collar
