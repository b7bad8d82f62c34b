#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace collar {

/// A collar profile rho(eps, t): positive, positively homogeneous of degree 1
/// on R^2 minus the origin, strictly convex along non-radial lines, with
/// d_eps rho >= 0 for eps >= 0 and the t-minimum normalized to t = 0.
///
/// Derivatives are supplied analytically by each factory. d_tt is optional
/// (used only where a second derivative is needed; a central-difference
/// fallback is applied when absent).
struct ProfileFunction {
    std::string name;
    std::function<double(double, double)> eval;   // rho(eps, t)
    std::function<double(double, double)> d_eps;  // d rho / d eps
    std::function<double(double, double)> d_t;    // d rho / d t
    std::function<double(double, double)> d_tt;   // optional second t-derivative

    /// Second t-derivative, analytic when available, else central difference.
    double second_t(double eps, double t) const;
};

/// rho(eps, t) = sqrt(eps^2 + t^2).
ProfileFunction make_sqrt_profile();

/// rho(eps, t) = (eps^p + t^p)^{1/p} for even p >= 2. p = 2 coincides with
/// the sqrt profile. Rejects odd or negative p.
ProfileFunction make_power_profile(int p);

/// Same geometry with the t-minimum moved to t = c*eps (composition with
/// t -> t - c*eps). Still homogeneous of degree 1.
ProfileFunction make_shifted_profile(const ProfileFunction& base, double c);

/// Constant profile rho == value. Not homogeneous; test/synthetic use only
/// (flat operators with the warped-product machinery bypassed).
ProfileFunction make_constant_profile(double value);

/// Parses a profile identifier: "sqrt", "power:4", "shifted:sqrt:c=0.3".
ProfileFunction parse_profile(std::string_view id);

/// sigma_eps(t) = (d_eps rho / rho)(eps, t). Bounded by 1/eps, with equality
/// only at t = 0.
double log_deriv(const ProfileFunction& p, double eps, double t);

/// Warp exponents and fiber dimension of the metric rho^{2a} dt^2 + rho^{2b} h.
struct ExponentData {
    double a = 0.0;
    double b = 0.0;
    int d = 1; // fiber dimension
};

enum class CaseLabel {
    HyperbolicLike, // main-theorem scope
    BNonpositive,   // a < -1, b <= 0  or  a = -1, b < 0
    Adiabatic,      // (a, b) = (-1, 0)
    OutOfScope,
};

/// Classification of the limiting geometry at eps = 0.
struct GeometryClass {
    bool complete = false;       // a <= -1
    bool finite_volume = false;  // a + b*d > -1
    bool main_theorem_scope = false;
    CaseLabel case_label = CaseLabel::OutOfScope;
};

GeometryClass classify(const ExponentData& exp);

/// Short human-readable description ("complete, finite volume, ...").
std::string describe(const GeometryClass& g);

} // namespace collar
