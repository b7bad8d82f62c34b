#include "collar/checks.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collar {

namespace {

std::vector<double> branch_eps(const EigenBranch& br) {
    std::vector<double> e;
    for (const auto& s : br.samples)
        e.push_back(s.eps);
    return e;
}

std::vector<double> branch_lambda(const EigenBranch& br) {
    std::vector<double> l;
    for (const auto& s : br.samples)
        l.push_back(s.lambda);
    return l;
}

struct Ols {
    double slope = 0.0, intercept = 0.0;
    int n = 0;
};

Ols ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    Ols o;
    o.n = static_cast<int>(x.size());
    if (o.n < 2)
        return o;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < o.n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = o.n * sxx - sx * sx;
    if (det == 0.0)
        return o;
    o.slope = (o.n * sxy - sx * sy) / det;
    o.intercept = (sy - o.slope * sx) / o.n;
    return o;
}

// indices of the last decade of eps: eps <= 10 * eps_min
std::vector<int> tail_indices(const std::vector<double>& eps) {
    double emin = std::numeric_limits<double>::infinity();
    for (double e : eps)
        emin = std::min(emin, e);
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(eps.size()); ++i)
        if (eps[i] <= 10.0 * emin)
            idx.push_back(i);
    return idx;
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Pass:
        return "PASS";
    case Verdict::Fail:
        return "FAIL";
    default:
        return "INCONCLUSIVE";
    }
}

TailStats tail_oscillation(const std::vector<double>& eps, const std::vector<double>& f) {
    TailStats t;
    if (eps.empty() || eps.size() != f.size())
        return t;
    double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
    for (double e : eps) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
    }
    t.tail_min = std::numeric_limits<double>::infinity();
    t.tail_max = -t.tail_min;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        t.scale = std::max(t.scale, std::abs(f[i]));
        if (eps[i] <= 10.0 * emin) {
            t.tail_min = std::min(t.tail_min, f[i]);
            t.tail_max = std::max(t.tail_max, f[i]);
            ++t.tail_count;
        }
        if (eps[i] == emin)
            t.last_value = f[i];
    }
    t.has_decade = 10.0 * emin <= emax / 10.0;
    t.osc_abs = t.tail_max - t.tail_min;
    t.oscillation = t.osc_abs / std::max(t.scale, 1e-300);
    return t;
}

double tail_loglog_slope(const std::vector<double>& eps, const std::vector<double>& f) {
    const auto idx = tail_indices(eps);
    std::vector<double> lx, ly;
    for (int i : idx)
        if (f[i] > 0.0 && eps[i] > 0.0) {
            lx.push_back(std::log(eps[i]));
            ly.push_back(std::log(f[i]));
        }
    return ols_fit(lx, ly).slope;
}

CheckReport check_log_derivative_bound(const EigenBranch& br, const ExponentData& exp,
                                       const CheckParams& p) {
    CheckReport r;
    r.check_id = "log_derivative_bound";
    r.branch_id = br.id;
    r.threshold["bound"] = 1.0 + p.logderiv_slack;
    if (static_cast<int>(br.samples.size()) < p.min_samples) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "fewer than " + std::to_string(p.min_samples) + " samples";
        return r;
    }
    const double metric_rate = std::max(2.0 * std::abs(exp.a), 2.0 * std::abs(exp.b));
    const double cdim = double(exp.d) + 2.0; // dim(N) + 1
    r.measured["bound_constant"] = cdim * metric_rate;
    double sup = 0.0, sup_eps = 0.0;
    for (const auto& s : br.samples) {
        if (!(s.lambda > 0.0)) {
            r.verdict = Verdict::Inconclusive;
            r.notes = "lambda not strictly positive along the branch";
            return r;
        }
        const double q = std::abs(s.dlambda / s.lambda) * s.eps / (cdim * metric_rate);
        if (q > sup) {
            sup = q;
            sup_eps = s.eps;
        }
    }
    r.measured["sup_normalized"] = sup;
    r.measured["argmax_eps"] = sup_eps;
    r.verdict = sup <= 1.0 + p.logderiv_slack ? Verdict::Pass : Verdict::Fail;
    return r;
}

CheckReport check_apriori_limit(const EigenBranch& br, double b, const CheckParams& p) {
    CheckReport r;
    r.check_id = "apriori_limit";
    r.branch_id = br.id;
    r.threshold["oscillation_tol"] = p.oscillation_tol;
    if (!(b > 0.0))
        throw DomainError("check_apriori_limit: requires b > 0");
    const auto eps = branch_eps(br);
    std::vector<double> f(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i)
        f[i] = std::pow(eps[i], 2.0 * b) * br.samples[i].lambda;
    const TailStats t = tail_oscillation(eps, f);
    if (!t.has_decade || t.tail_count < 5) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "needs a full decade of eps below eps_hi/10";
        return r;
    }
    r.measured["oscillation"] = t.oscillation;
    r.measured["limit_estimate"] = t.last_value;
    r.verdict = t.oscillation <= p.oscillation_tol ? Verdict::Pass : Verdict::Fail;
    return r;
}

MuStar compute_mu_star(const EigenBranch& br, const WarpedFamily& fam, const CheckParams& p) {
    MuStar m;
    const double b = fam.exp.b;
    if (!(b > 0.0))
        throw DomainError("compute_mu_star: requires b > 0");
    const auto eps = branch_eps(br);
    std::vector<double> f(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i)
        f[i] = std::pow(fam.profile.eval(eps[i], 0.0), 2.0 * b) * br.samples[i].lambda;
    const TailStats t = tail_oscillation(eps, f);
    if (!t.has_decade || t.tail_count < 5) {
        m.inconclusive = true;
        return m;
    }
    // Richardson step: linear-in-eps fit over the tail, intercept at eps = 0
    std::vector<double> xe, yf;
    const auto idx = tail_indices(eps);
    for (int i : idx) {
        xe.push_back(eps[i]);
        yf.push_back(f[i]);
    }
    m.mu_star = ols_fit(xe, yf).intercept;
    m.resolution = std::max(t.osc_abs, 1e-9 * std::max(std::abs(m.mu_star), 1.0));
    m.distance = std::numeric_limits<double>::infinity();
    for (const auto& mode : fam.fiber_spectrum)
        if (mode.mu > 0.0)
            m.distance = std::min(m.distance, std::abs(m.mu_star - mode.mu));
    m.resonant = m.distance <= m.resolution;
    return m;
}

CheckReport check_branch_limit(const EigenBranch& br, const ExponentData& exp,
                               const CheckParams& p) {
    CheckReport r;
    r.check_id = "branch_limit";
    r.branch_id = br.id;
    const GeometryClass g = classify(exp);
    const auto eps = branch_eps(br);
    const auto lam = branch_lambda(br);
    const TailStats t = tail_oscillation(eps, lam);
    if (!t.has_decade || t.tail_count < 5) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "needs a full decade of eps below eps_hi/10";
        return r;
    }
    const bool convergent_regime =
        g.main_theorem_scope || (g.case_label == CaseLabel::BNonpositive && exp.a < -1.0);
    if (convergent_regime) {
        r.threshold["oscillation_tol"] = p.oscillation_tol;
        r.measured["oscillation"] = t.oscillation;
        r.measured["limit_estimate"] = t.last_value;
        r.verdict = t.oscillation <= p.oscillation_tol ? Verdict::Pass : Verdict::Fail;
        return r;
    }
    if (exp.a == -1.0 && exp.b < 0.0) {
        // boundedness: no growth trend toward eps -> 0
        const double slope = tail_loglog_slope(eps, lam);
        r.threshold["min_slope"] = -p.bounded_slope_tol;
        r.measured["tail_slope"] = slope;
        r.measured["tail_max"] = t.tail_max;
        r.measured["global_max"] = t.scale;
        r.verdict = slope >= -p.bounded_slope_tol ? Verdict::Pass : Verdict::Fail;
        return r;
    }
    r.verdict = Verdict::Inconclusive;
    r.notes = "exponents outside the convergence/boundedness regimes";
    return r;
}

NegVariation negative_variation(const EigenBranch& br, NvTransform tr) {
    NegVariation out;
    if (br.samples.size() < 2) {
        out.inconclusive = true;
        return out;
    }
    // ascending eps
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : br.samples) {
        const double f = tr == NvTransform::Log1p ? std::log1p(s.lambda) : s.lambda;
        pts.push_back({s.eps, f});
    }
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0)
            acc += std::max(0.0, -(pts[i].second - pts[i - 1].second));
        out.eps.push_back(pts[i].first);
        out.nv.push_back(acc);
    }
    out.vacuous = acc == 0.0;
    if (out.vacuous)
        return out;
    // fit above the bottom decade: measured nv is truncated at eps_min, which
    // distorts the smallest scales
    const double emin = out.eps.front();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < out.eps.size(); ++i)
        if (out.eps[i] >= 10.0 * emin && out.nv[i] > 0.0) {
            lx.push_back(std::log(out.eps[i]));
            ly.push_back(std::log(out.nv[i]));
        }
    if (lx.size() < 3) {
        out.inconclusive = true;
        return out;
    }
    out.fitted_exponent = ols_fit(lx, ly).slope;
    return out;
}

CheckReport check_negative_variation(const EigenBranch& br, const ExponentData& exp,
                                     const CheckParams& p) {
    CheckReport r;
    r.check_id = "negative_variation";
    r.branch_id = br.id;
    const double predicted = -2.0 * exp.a - 2.0;
    r.threshold["min_exponent"] = predicted - p.nv_exponent_slack;
    const NegVariation nv = negative_variation(br, NvTransform::Log1p);
    if (nv.vacuous) {
        r.verdict = Verdict::Pass;
        r.measured["nv_total"] = 0.0;
        r.notes = "monotone branch: negative variation identically zero (vacuous)";
        return r;
    }
    if (nv.inconclusive) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "too few samples with nonzero negative variation";
        return r;
    }
    r.measured["fitted_exponent"] = nv.fitted_exponent;
    r.measured["nv_total"] = nv.nv.back();
    r.verdict = nv.fitted_exponent >= predicted - p.nv_exponent_slack ? Verdict::Pass
                                                                      : Verdict::Fail;
    return r;
}

RegionA region_A(const WarpedFamily& fam, double lambda, double eps) {
    if (!(lambda > 0.0))
        throw DomainError("region_A: lambda must be positive");
    if (!(fam.exp.b > 0.0))
        throw DomainError("region_A: requires b > 0");
    const double thresh = 0.5 * fam.mu1();
    const double tb = 2.0 * fam.exp.b;
    auto over = [&](double t) {
        return lambda * std::pow(fam.profile.eval(eps, t), tb) > thresh;
    };
    RegionA r;
    r.eps = eps;
    if (over(0.0)) {
        r.empty = true;
        return r;
    }
    const double T = fam.halfwidth;
    auto flank = [&](double sign) {
        if (!over(sign * T)) {
            r.clamped = true;
            return sign * T;
        }
        double lo = 0.0, hi = T; // in |t|; rho increases along the flank
        for (int it = 0; it < 200 && hi - lo > 1e-15 * T; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (over(sign * mid))
                hi = mid;
            else
                lo = mid;
        }
        return sign * 0.5 * (lo + hi);
    };
    r.t_plus = flank(1.0);
    r.t_minus = flank(-1.0);
    return r;
}

CheckReport check_region_lower_bound(const EigenBranch& br, const WarpedFamily& fam,
                                     double mu_star, const CheckParams& p) {
    CheckReport r;
    r.check_id = "region_lower_bound";
    r.branch_id = br.id;
    r.threshold["inf_over_median"] = p.region_ratio_rule;
    r.threshold["max_drift_slope"] = p.bounded_slope_tol;
    if (!(mu_star < 0.5 * fam.mu1())) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "mu_star not below mu1/2; lower bound out of scope";
        return r;
    }
    const auto eps = branch_eps(br);
    const auto idx = tail_indices(eps);
    std::vector<double> te, ratio;
    for (int i : idx) {
        const auto& s = br.samples[i];
        if (!(s.lambda > 0.0))
            continue;
        const RegionA a = region_A(fam, s.lambda, s.eps);
        if (a.empty)
            continue;
        te.push_back(s.eps);
        ratio.push_back(std::min(std::abs(a.t_minus), std::abs(a.t_plus)) / s.eps);
    }
    if (ratio.size() < 5) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "too few nonempty regions in the tail";
        return r;
    }
    std::vector<double> sorted = ratio;
    std::sort(sorted.begin(), sorted.end());
    const double inf = sorted.front();
    const double median = sorted[sorted.size() / 2];
    const double slope = [&] {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < te.size(); ++i) {
            lx.push_back(std::log(te[i]));
            ly.push_back(std::log(ratio[i]));
        }
        return ols_fit(lx, ly).slope;
    }();
    r.measured["infimum"] = inf;
    r.measured["median"] = median;
    r.measured["drift_slope"] = slope; // > 0 means the ratio sinks as eps -> 0
    const bool pass = inf > p.region_ratio_rule * median || slope <= p.bounded_slope_tol;
    r.verdict = pass ? Verdict::Pass : Verdict::Fail;
    return r;
}

K0Estimate estimate_k0(const EigenBranch& br, double b, const CheckParams& p) {
    K0Estimate k;
    if (!(b > 0.0))
        throw DomainError("estimate_k0: requires b > 0");
    const auto eps = branch_eps(br);
    const auto idx = tail_indices(eps);
    if (static_cast<int>(idx.size()) < 5 ||
        static_cast<int>(br.samples.size()) < p.min_samples) {
        k.inconclusive = true;
        return k;
    }
    k.slope = tail_loglog_slope(eps, branch_lambda(br));
    k.k0 = -k.slope / (2.0 * b);
    return k;
}

CheckReport check_k0_implication(const EigenBranch& br, const ExponentData& exp,
                                 const CheckParams& p) {
    CheckReport r;
    r.check_id = "k0_implication";
    r.branch_id = br.id;
    r.threshold["k0_threshold"] = p.k0_pass_threshold;
    const K0Estimate k = estimate_k0(br, exp.b, p);
    if (k.inconclusive) {
        r.verdict = Verdict::Inconclusive;
        r.notes = "k0 estimate inconclusive on a short tail";
        return r;
    }
    r.measured["k0"] = k.k0;
    if (k.k0 >= p.k0_pass_threshold) {
        r.verdict = Verdict::Pass;
        r.notes = "k0 above threshold: implication vacuous";
        return r;
    }
    const CheckReport bl = check_branch_limit(br, exp, p);
    r.measured["branch_limit_oscillation"] =
        bl.measured.count("oscillation") ? bl.measured.at("oscillation") : -1.0;
    r.verdict = bl.verdict;
    if (bl.verdict != Verdict::Pass)
        r.notes = "k0 < threshold but the branch limit check did not pass";
    return r;
}

std::vector<FiberMode> fourier_mode_split(const WarpedFamily& fam) {
    fam.validate();
    return fam.fiber_spectrum;
}

std::vector<std::pair<double, double>> resonance_defect(const EigenBranch& br,
                                                        const WarpedFamily& fam,
                                                        double mu_star) {
    std::vector<std::pair<double, double>> out;
    const double tb = 2.0 * fam.exp.b;
    for (const auto& s : br.samples)
        out.push_back({s.eps, s.lambda - mu_star * std::pow(fam.profile.eval(s.eps, 0.0), -tb)});
    return out;
}

double weighted_logderiv_mass(const OperatorPencil& pencil, const ProfileFunction& profile,
                              const std::vector<double>& vec) {
    if (static_cast<int>(vec.size()) != pencil.order())
        throw DomainError("weighted_logderiv_mass: size mismatch");
    double acc = 0.0;
    for (int i = 0; i < pencil.order(); ++i)
        acc += log_deriv(profile, pencil.eps, pencil.positions[i]) * vec[i] * vec[i] *
               pencil.weight[i];
    return acc;
}

} // namespace collar
