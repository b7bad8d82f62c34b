#pragma once

#include "collar/profiles.hpp"

#include <functional>
#include <string>
#include <vector>

namespace collar {

/// The model second-order equation
///   w''(s) = eta * f(s) * (beta + s^2 h(s)) * w(s) + g(s) * w(s)
/// with f > 0 continuous; sigma is the measure weight used by the mass
/// functionals.
struct ModelODE {
    std::function<double(double)> f, g, h;
    double beta = 0.0;
    double eta = 1.0;
    std::function<double(double)> sigma; // defaults to 1 when empty
};

struct ODESolution {
    std::vector<double> s, w, wp;
    double eta = 1.0, beta = 0.0;
};

/// Step bound resolving the local wavelength: 0.1 / sqrt(sup q) with
/// q = eta |f (beta + s^2 h)| + |g| (supremum sampled on the interval).
double suggested_step(const ModelODE& ode, double s0, double s1);

/// Classic fourth-order one-step integration of the 2-system from
/// (w(s0), w'(s0)). Throws BlowupError when |w| exceeds 1e150 and
/// DomainError when the step violates the wavelength bound.
ODESolution solve_model(const ModelODE& ode, double s0, double s1, double w0, double wp0,
                        double step);

/// Reflects a [0, S] solution of an even problem to [-S, S].
ODESolution mirror_even(const ODESolution& sol);

/// (integral of w^2 sigma over |s| <= r) / (same over r < |s| <= 2r) with
/// r = eta^{-1/4} * half_I, trapezoid rule on the solution nodes. Throws
/// NumericalError when the annulus mass underflows.
double mass_ratio(const ODESolution& sol, const std::function<double(double)>& sigma,
                  double eta, double half_I);

/// Smallest W with (mass of w^2 over |s| <= W) >= half the total mass.
double half_mass_width(const ODESolution& sol);

struct ShootResult {
    double beta = 0.0;
    ODESolution sol; // even solution on [-S, S]
    bool converged = false;
};

/// Bisection on beta for the node-free decaying (ground-state) solution of
/// w'' = eta f (beta + s^2 h) w + g w, shooting from (1, 0) at s = 0 with
/// renormalized integration. S = smax_factor * eta^{-1/4}.
ShootResult shoot_ground_state(const ModelODE& base, double eta, double smax_factor = 6.0);

struct SweepPoint {
    double eta = 0.0, beta = 0.0, width = 0.0, mass_ratio = 0.0;
    std::string status; // "ok" or a failure tag
};

struct WidthFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    int n_ok = 0;
};

enum class BetaRule { GroundState };

/// Half-mass width across an eta grid with beta pinned per point by the
/// rule; returns the least-squares slope of log W against log eta. Failures
/// propagate into the per-point status; at least 5 successes are required
/// for the fit (n_ok reports how many).
WidthFit width_exponent(const ModelODE& base, const std::vector<double>& eta_grid, BetaRule rule,
                        std::vector<SweepPoint>* points = nullptr);

/// Wires the rescaled radial eigenvalue equation to the model form:
///   v''(s) = eta * rho^{2a-2b}(1,s) * (mu_hat - rho^{2b}(1,s)) * v + g(s) v
/// with mu_hat = mu*/(lambda eps^{2b}) and g the conjugation remainder of
/// v = rho^{(-a+bd)/2}(1, s) * psi(eps s). sigma defaults to rho^{2a}(1, s).
ModelODE rescaled_collar_ode(const ProfileFunction& profile, const ExponentData& exp,
                             double mu_hat, double eta);

} // namespace collar
