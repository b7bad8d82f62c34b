#pragma once

#include "collar/pencil.hpp"
#include "collar/profiles.hpp"
#include "collar/tracker.hpp"

#include <map>
#include <string>
#include <vector>

namespace collar {

enum class Verdict { Pass, Fail, Inconclusive };

/// Structured outcome of one check on one branch. verdict == Pass exactly
/// when every measured value satisfies its threshold predicate.
struct CheckReport {
    std::string check_id;
    int branch_id = -1;
    std::map<std::string, double> measured;
    std::map<std::string, double> threshold;
    Verdict verdict = Verdict::Inconclusive;
    std::string notes;
};

struct CheckParams {
    double oscillation_tol = 0.02;  // "tends to a finite limit" operationalized
    double logderiv_slack = 0.05;
    double nv_exponent_slack = 0.2;
    double k0_pass_threshold = 0.95;
    double bounded_slope_tol = 0.05;
    double region_ratio_rule = 0.5; // infimum vs median rule
    int min_samples = 10;
};

/// Convergence measure used throughout: (max - min over the last eps-decade)
/// divided by the largest |f| over the whole branch. Normalizing by the
/// branch-wide scale keeps limits equal to zero measurable (a tail-max
/// denominator would report ~1 for any f -> 0).
struct TailStats {
    double oscillation = 0.0; // relative to branch scale
    double osc_abs = 0.0;
    double tail_min = 0.0, tail_max = 0.0;
    double scale = 0.0;     // max |f| over all samples
    double last_value = 0.0;
    int tail_count = 0;
    bool has_decade = false; // tail sits below eps_hi / 10
};
TailStats tail_oscillation(const std::vector<double>& eps, const std::vector<double>& f);

/// Least-squares slope of log f against log eps over the last decade.
double tail_loglog_slope(const std::vector<double>& eps, const std::vector<double>& f);

/// sup over samples of |lambda'/lambda| * eps / ((d+2) * max(2|a|, 2|b|)),
/// against 1 + slack. The collar supremum of |g'/g| is max(2|a|,2|b|)/eps
/// and dim(N) = d + 1.
CheckReport check_log_derivative_bound(const EigenBranch& br, const ExponentData& exp,
                                       const CheckParams& p = {});

/// Tail oscillation of f(eps) = eps^{2b} lambda(eps); requires b > 0.
CheckReport check_apriori_limit(const EigenBranch& br, double b, const CheckParams& p = {});

struct MuStar {
    double mu_star = 0.0;
    bool resonant = false;
    double distance = 0.0;   // to the nearest positive fiber eigenvalue
    double resolution = 0.0; // propagated from the tail oscillation
    bool inconclusive = false;
};
/// mu* = lim rho^{2b}(eps,0) lambda(eps), estimated by a linear-in-eps fit
/// over the last decade (Richardson step), with the resonance test against
/// the positive fiber spectrum.
MuStar compute_mu_star(const EigenBranch& br, const WarpedFamily& fam, const CheckParams& p = {});

/// Branch-limit check; the regime is decided from the exponents:
/// convergent cases measure tail oscillation of lambda, the (a = -1, b < 0)
/// case measures boundedness (tail log-log slope >= -tol).
CheckReport check_branch_limit(const EigenBranch& br, const ExponentData& exp,
                               const CheckParams& p = {});

enum class NvTransform { Log1p, Raw };
struct NegVariation {
    std::vector<double> eps; // ascending
    std::vector<double> nv;  // accumulated decrease of f over ]eps_min, eps]
    double fitted_exponent = 0.0;
    bool vacuous = false; // nv identically zero (monotone branch)
    bool inconclusive = false;
};
NegVariation negative_variation(const EigenBranch& br, NvTransform tr);

/// Verdict wrapper for the a < -1, b <= 0 regime: fitted exponent of nv
/// against the predicted (-2a - 2), within slack; monotone branches pass
/// vacuously with a note.
CheckReport check_negative_variation(const EigenBranch& br, const ExponentData& exp,
                                     const CheckParams& p = {});

/// The sublevel region lambda * rho^{2b}(eps, t) <= mu1/2.
struct RegionA {
    double eps = 0.0;
    double t_minus = 0.0, t_plus = 0.0;
    bool empty = false;   // inequality already fails at t = 0
    bool clamped = false; // region reaches the interval ends
};
RegionA region_A(const WarpedFamily& fam, double lambda, double eps);

/// Inner-radius lower bound along a branch: r(eps) = min|t_pm|/eps over the
/// last decade must stay away from zero. Passes when inf > rule * median or
/// when r does not drift toward 0 as eps decreases (log-log slope <= tol;
/// regions whose inner radius is O(1) rather than O(eps) make r grow like
/// 1/eps, which the inf/median form alone would misread as drift).
CheckReport check_region_lower_bound(const EigenBranch& br, const WarpedFamily& fam,
                                     double mu_star, const CheckParams& p = {});

struct K0Estimate {
    double k0 = 0.0;
    double slope = 0.0;
    bool inconclusive = false;
};
/// k0 = -slope / (2b) from the tail log-log slope of lambda.
K0Estimate estimate_k0(const EigenBranch& br, double b, const CheckParams& p = {});

/// Cross-validation: k0 < threshold must imply a passing branch limit.
CheckReport check_k0_implication(const EigenBranch& br, const ExponentData& exp,
                                 const CheckParams& p = {});

/// The fiber sectors to track: mu = 0 plus every mode of the family's
/// spectrum (each tracked branch lives in exactly one sector).
std::vector<FiberMode> fourier_mode_split(const WarpedFamily& fam);

/// Report-only diagnostic: f(eps) = lambda - mu* rho^{-2b}(eps, 0) per
/// sample. No verdict attaches to it.
std::vector<std::pair<double, double>> resonance_defect(const EigenBranch& br,
                                                        const WarpedFamily& fam, double mu_star);

/// Experimental (not wired to the CLI): the weighted mass
/// sum (rho_eps/rho)(eps, t_i) u_i^2 B_ii entering the gradient lower bound.
double weighted_logderiv_mass(const OperatorPencil& pencil, const ProfileFunction& profile,
                              const std::vector<double>& vec);

const char* verdict_name(Verdict v);

} // namespace collar
