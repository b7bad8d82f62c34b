#include "collar/profiles.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

namespace collar {

namespace {

void require_domain(double eps, double t) {
    if (eps < 0.0)
        throw DomainError("profile: eps must be >= 0");
    if (eps == 0.0 && t == 0.0)
        throw DomainError("profile: (0, 0) is outside the domain");
}

} // namespace

double ProfileFunction::second_t(double eps, double t) const {
    if (d_tt)
        return d_tt(eps, t);
    const double h = 1e-6 * std::max({eps, std::abs(t), 1e-3});
    return (d_t(eps, t + h) - d_t(eps, t - h)) / (2.0 * h);
}

ProfileFunction make_sqrt_profile() {
    ProfileFunction p;
    p.name = "sqrt";
    p.eval = [](double eps, double t) {
        require_domain(eps, t);
        return std::hypot(eps, t);
    };
    p.d_eps = [](double eps, double t) {
        require_domain(eps, t);
        return eps / std::hypot(eps, t);
    };
    p.d_t = [](double eps, double t) {
        require_domain(eps, t);
        return t / std::hypot(eps, t);
    };
    p.d_tt = [](double eps, double t) {
        require_domain(eps, t);
        const double r = std::hypot(eps, t);
        return eps * eps / (r * r * r);
    };
    return p;
}

ProfileFunction make_power_profile(int p) {
    if (p < 2 || p % 2 != 0)
        throw DomainError("power profile: exponent must be even and >= 2");
    ProfileFunction f;
    f.name = "power:" + std::to_string(p);
    // scale by max(|eps|,|t|) so intermediate powers stay in range
    auto val = [p](double eps, double t) {
        require_domain(eps, t);
        const double m = std::max(eps, std::abs(t));
        const double x = eps / m, y = t / m;
        return m * std::pow(std::pow(x, p) + std::pow(y, p), 1.0 / p);
    };
    f.eval = val;
    f.d_eps = [p, val](double eps, double t) {
        return std::pow(eps / val(eps, t), p - 1);
    };
    f.d_t = [p, val](double eps, double t) {
        return std::pow(t / val(eps, t), p - 1); // p-1 odd, sign follows t
    };
    f.d_tt = [p, val](double eps, double t) {
        const double r = val(eps, t);
        const double w = std::pow(t / r, p - 2);
        const double dt = std::pow(t / r, p - 1);
        return (p - 1) * w * (1.0 - dt * t / r) / r;
    };
    return f;
}

ProfileFunction make_shifted_profile(const ProfileFunction& base, double c) {
    ProfileFunction f;
    f.name = "shifted:" + base.name + ":c=" + std::to_string(c);
    auto b = base; // capture by value; profiles are immutable
    f.eval = [b, c](double eps, double t) { return b.eval(eps, t - c * eps); };
    f.d_eps = [b, c](double eps, double t) {
        return b.d_eps(eps, t - c * eps) - c * b.d_t(eps, t - c * eps);
    };
    f.d_t = [b, c](double eps, double t) { return b.d_t(eps, t - c * eps); };
    if (b.d_tt)
        f.d_tt = [b, c](double eps, double t) { return b.d_tt(eps, t - c * eps); };
    return f;
}

ProfileFunction make_constant_profile(double value) {
    if (!(value > 0.0))
        throw DomainError("constant profile: value must be positive");
    ProfileFunction f;
    f.name = "const:" + std::to_string(value);
    f.eval = [value](double, double) { return value; };
    f.d_eps = [](double, double) { return 0.0; };
    f.d_t = [](double, double) { return 0.0; };
    f.d_tt = [](double, double) { return 0.0; };
    return f;
}

ProfileFunction parse_profile(std::string_view id) {
    if (id == "sqrt")
        return make_sqrt_profile();
    if (id.starts_with("power:")) {
        int p = 0;
        auto s = id.substr(6);
        auto r = std::from_chars(s.data(), s.data() + s.size(), p);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
            throw DomainError("profile id: bad power exponent in '" + std::string(id) + "'");
        return make_power_profile(p);
    }
    if (id.starts_with("shifted:")) {
        auto rest = id.substr(8);
        auto sep = rest.rfind(":c=");
        if (sep == std::string_view::npos)
            throw DomainError("profile id: expected shifted:<base>:c=<value>");
        double c = 0.0;
        auto cs = rest.substr(sep + 3);
        auto r = std::from_chars(cs.data(), cs.data() + cs.size(), c);
        if (r.ec != std::errc{} || r.ptr != cs.data() + cs.size())
            throw DomainError("profile id: bad shift value in '" + std::string(id) + "'");
        return make_shifted_profile(parse_profile(rest.substr(0, sep)), c);
    }
    throw DomainError("unknown profile id '" + std::string(id) + "'");
}

double log_deriv(const ProfileFunction& p, double eps, double t) {
    if (!(eps > 0.0))
        throw DomainError("log_deriv: eps must be positive");
    return p.d_eps(eps, t) / p.eval(eps, t);
}

GeometryClass classify(const ExponentData& exp) {
    if (exp.d < 1)
        throw DomainError("classify: fiber dimension must be >= 1");
    GeometryClass g;
    const double a = exp.a, b = exp.b;
    const double abd = a + b * exp.d;
    g.complete = (a <= -1.0);
    g.finite_volume = (abd > -1.0);
    g.main_theorem_scope = (b > 0.0) && (a < -1.0 || (a == -1.0 && abd == 0.0));
    if (g.main_theorem_scope)
        g.case_label = CaseLabel::HyperbolicLike;
    else if ((a < -1.0 && b <= 0.0) || (a == -1.0 && b < 0.0))
        g.case_label = CaseLabel::BNonpositive;
    else if (a == -1.0 && b == 0.0)
        g.case_label = CaseLabel::Adiabatic;
    else
        g.case_label = CaseLabel::OutOfScope;
    return g;
}

std::string describe(const GeometryClass& g) {
    std::string s;
    s += g.complete ? "complete" : "incomplete";
    s += g.finite_volume ? ", finite volume" : ", infinite volume";
    switch (g.case_label) {
    case CaseLabel::HyperbolicLike:
        s += ", main-theorem scope (hyperbolic-like degeneration)";
        break;
    case CaseLabel::BNonpositive:
        s += ", b <= 0 regime (branch limits / boundedness)";
        break;
    case CaseLabel::Adiabatic:
        s += ", adiabatic case (-1, 0): out of scope (future work)";
        break;
    case CaseLabel::OutOfScope:
        s += ", out of scope";
        break;
    }
    return s;
}

} // namespace collar
