#include "collar/eigen.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collar {

namespace {

struct Reduced {
    std::vector<double> d;   // B^{-1/2} A B^{-1/2} diagonal (shifted)
    std::vector<double> e;   // off-diagonal
    std::vector<double> e2;  // squared off-diagonal
    std::vector<double> sqw; // sqrt of B diagonal (back transform)
    double shift = 0.0;      // applied to d; subtracted from results
    double norm = 0.0;       // inf norm of the shifted matrix
    double pivmin = 0.0;
    double glo = 0.0, ghi = 0.0; // Gershgorin bounds (shifted)
};

Reduced reduce(const OperatorPencil& p) {
    const int n = p.order();
    if (n < 1)
        throw DomainError("eigensolver: empty pencil");
    Reduced r;
    r.d.resize(n);
    r.e.assign(std::max(0, n - 1), 0.0);
    r.e2.assign(std::max(0, n - 1), 0.0);
    r.sqw.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!(p.weight[i] > 0.0))
            throw DomainError("eigensolver: B must be positive");
        r.sqw[i] = std::sqrt(p.weight[i]);
        r.d[i] = p.diag[i] / p.weight[i];
    }
    for (int i = 0; i + 1 < n; ++i) {
        r.e[i] = p.off[i] / (r.sqw[i] * r.sqw[i + 1]);
        r.e2[i] = r.e[i] * r.e[i];
    }
    double glo = std::numeric_limits<double>::infinity(), ghi = -glo;
    for (int i = 0; i < n; ++i) {
        const double radius = (i > 0 ? std::abs(r.e[i - 1]) : 0.0) +
                              (i + 1 < n ? std::abs(r.e[i]) : 0.0);
        glo = std::min(glo, r.d[i] - radius);
        ghi = std::max(ghi, r.d[i] + radius);
    }
    // spectral-transform shift keeps Sturm pivots away from sign trouble
    r.shift = std::max(0.0, -glo);
    for (auto& v : r.d)
        v += r.shift;
    r.glo = glo + r.shift;
    r.ghi = ghi + r.shift;
    double maxe2 = 1.0, norm = 0.0;
    for (int i = 0; i < n; ++i) {
        maxe2 = std::max(maxe2, i + 1 < n ? r.e2[i] : 0.0);
        norm = std::max(norm, std::abs(r.d[i]) +
                                  (i > 0 ? std::abs(r.e[i - 1]) : 0.0) +
                                  (i + 1 < n ? std::abs(r.e[i]) : 0.0));
    }
    r.norm = std::max(norm, 1e-300);
    r.pivmin = std::numeric_limits<double>::min() * maxe2;
    return r;
}

int count_below(const Reduced& r, double x) {
    const int n = static_cast<int>(r.d.size());
    int c = 0;
    double q = r.d[0] - x;
    if (q < 0.0)
        ++c;
    const double* d = r.d.data();
    const double* e2 = r.e2.data();
    const double pivmin = r.pivmin;
    for (int i = 1; i < n; ++i) {
        if (std::abs(q) <= pivmin)
            q = -pivmin;
        q = d[i] - x - e2[i - 1] / q;
        if (q < 0.0)
            ++c;
    }
    return c;
}

// Bisect for eigenvalue #index (0-based); bracket must satisfy
// count(lo) <= index < count(hi).
double bisect_index(const Reduced& r, int index, double lo, double hi, double rel_tol) {
    for (int it = 0; it < 220; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (!((hi - lo) > rel_tol * std::max({std::abs(lo), std::abs(hi), 1e-300})))
            break;
        if (count_below(r, mid) <= index)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double eigenvalue_at(const Reduced& r, int index, double rel_tol, const double* hint) {
    if (hint) {
        // window wide enough for a continuation step, widened once before
        // falling back to the full Gershgorin bracket
        double w = std::max(0.2 * std::abs(*hint), 1e-8 * r.norm);
        for (int attempt = 0; attempt < 2; ++attempt) {
            const double a = *hint - w, b = *hint + w;
            if (count_below(r, a) <= index && count_below(r, b) > index)
                return bisect_index(r, index, a, b, rel_tol);
            w *= 64.0;
        }
    }
    return bisect_index(r, index, r.glo, r.ghi, rel_tol);
}

// Tridiagonal LU with partial pivoting (gttrf/gtts2 scheme) for (T - sigma).
struct TriLU {
    std::vector<double> dl, dd, du, du2;
    std::vector<char> swapped;

    TriLU(const Reduced& r, double sigma, double clamp) {
        const int n = static_cast<int>(r.d.size());
        dd.resize(n);
        dl.assign(std::max(0, n - 1), 0.0);
        du.assign(std::max(0, n - 1), 0.0);
        du2.assign(std::max(0, n - 2), 0.0);
        swapped.assign(std::max(0, n - 1), 0);
        for (int i = 0; i < n; ++i)
            dd[i] = r.d[i] - sigma;
        for (int i = 0; i + 1 < n; ++i)
            dl[i] = du[i] = r.e[i];
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(dd[i]) >= std::abs(dl[i])) {
                if (dd[i] != 0.0) {
                    const double m = dl[i] / dd[i];
                    dl[i] = m;
                    dd[i + 1] -= m * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                const double m = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = m;
                const double tmp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = tmp - m * dd[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du[i + 1];
                }
                swapped[i] = 1;
            }
        }
        // keep the solve finite when sigma is (numerically) an eigenvalue
        for (auto& v : dd)
            if (std::abs(v) < clamp)
                v = (std::signbit(v) ? -clamp : clamp);
    }

    void solve(std::vector<double>& b) const {
        const int n = static_cast<int>(dd.size());
        for (int i = 0; i + 1 < n; ++i) {
            if (!swapped[i]) {
                b[i + 1] -= dl[i] * b[i];
            } else {
                const double tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - dl[i] * b[i];
            }
        }
        b[n - 1] /= dd[n - 1];
        if (n > 1)
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
        for (int i = n - 3; i >= 0; --i)
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

void scale(std::vector<double>& v, double c) {
    for (double& x : v)
        x *= c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

// deterministic seed vector; stream depends on (n, index, restart)
void fill_seed(std::vector<double>& v, int index, int restart) {
    std::uint64_t s = 0x9e3779b97f4a7c15ull ^ (std::uint64_t(v.size()) << 32) ^
                      (std::uint64_t(index) << 8) ^ std::uint64_t(restart);
    for (double& x : v) {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        x = double(std::int64_t(s >> 11)) / double(1ll << 52) - 1.0;
    }
}

double tridiag_residual(const Reduced& r, const std::vector<double>& v, double lam) {
    const int n = static_cast<int>(v.size());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double y = (r.d[i] - lam) * v[i];
        if (i > 0)
            y += r.e[i - 1] * v[i - 1];
        if (i + 1 < n)
            y += r.e[i] * v[i + 1];
        s += y * y;
    }
    return std::sqrt(s);
}

// inverse iteration for the (shifted) value lam_s; earlier vectors with close
// eigenvalues are projected out each pass
std::vector<double> inverse_iterate(const Reduced& r, double lam_s,
                                    const std::vector<const std::vector<double>*>& ortho,
                                    int max_restarts, double accept) {
    const int n = static_cast<int>(r.d.size());
    const double eps = std::numeric_limits<double>::epsilon();
    const double clamp = std::max(r.pivmin, eps * r.norm * 1e-3);
    std::vector<double> v(n);
    for (int restart = 0; restart < max_restarts; ++restart) {
        const double sigma = lam_s * (1.0 + double(restart) * 8.0 * eps) +
                             (restart ? double(restart) * eps * r.norm : 0.0);
        TriLU lu(r, sigma, clamp);
        fill_seed(v, static_cast<int>(ortho.size()), restart);
        scale(v, 1.0 / norm2(v));
        for (int it = 0; it < 6; ++it) {
            lu.solve(v);
            for (const auto* o : ortho) {
                const double c = dot(v, *o);
                for (int i = 0; i < n; ++i)
                    v[i] -= c * (*o)[i];
            }
            const double nv = norm2(v);
            if (!(nv > 0.0) || !std::isfinite(nv))
                break;
            scale(v, 1.0 / nv);
            if (it >= 1 && tridiag_residual(r, v, lam_s) <= accept)
                return v;
        }
        if (tridiag_residual(r, v, lam_s) <= 64.0 * accept && norm2(v) > 0.5)
            return v; // marginal but usable; typical inside tight clusters
    }
    throw SolverError("inverse iteration failed to converge (pathological cluster)");
}

} // namespace

int sturm_count_below(const OperatorPencil& pencil, double x) {
    const Reduced r = reduce(pencil);
    return count_below(r, x + r.shift);
}

SolveResult lowest_eigenpairs(const OperatorPencil& pencil, int k, const SolveOptions& opts) {
    const int n = pencil.order();
    if (k < 1 || k > n)
        throw DomainError("lowest_eigenpairs: need 1 <= k <= n");
    const Reduced r = reduce(pencil);
    const double eps = std::numeric_limits<double>::epsilon();
    const double rel_tol = std::min(opts.rel_tol, 1e-6);

    // one value beyond k gives the top pair a trustworthy gap
    const int kv = std::min(n, k + 1);
    std::vector<double> vals(kv);
    for (int i = 0; i < kv; ++i) {
        const double* hint = nullptr;
        double h = 0.0;
        if (i < static_cast<int>(opts.hints.size())) {
            h = opts.hints[i] + r.shift;
            hint = &h;
        }
        vals[i] = eigenvalue_at(r, i, rel_tol, hint);
    }
    for (int i = 1; i < kv; ++i)
        vals[i] = std::max(vals[i], vals[i - 1]); // bisection jitter guard

    const double scale_v = std::max({std::abs(vals[0]), std::abs(vals[kv - 1]), 1e-300});
    const double cluster_gap_tol = std::max(opts.cluster_rel_gap * scale_v, 4.0 * eps * r.norm);

    SolveResult out;
    out.pairs.resize(k);

    // vectors, with reorthogonalization against close neighbours
    std::vector<std::vector<double>> vecs(k);
    const double accept = std::max(1e2 * eps * r.norm * std::sqrt(double(n)),
                                   4.0 * rel_tol * scale_v);
    for (int i = 0; i < k; ++i) {
        std::vector<const std::vector<double>*> ortho;
        for (int j = 0; j < i; ++j)
            if (std::abs(vals[i] - vals[j]) < std::max(1e-8 * r.norm, 1e3 * cluster_gap_tol))
                ortho.push_back(&vecs[j]);
        vecs[i] = inverse_iterate(r, vals[i], ortho, opts.max_restarts, accept);
    }

    // clusters among the k returned values
    int start = 0;
    for (int i = 1; i <= k; ++i) {
        const bool joined = i < k && (vals[i] - vals[i - 1]) < cluster_gap_tol;
        if (!joined) {
            if (i - start >= 2)
                out.clusters.emplace_back(start, i);
            start = i;
        }
    }

    for (int i = 0; i < k; ++i) {
        EigenPair& p = out.pairs[i];
        p.lambda = vals[i] - r.shift;
        const double gap_lo = i > 0 ? vals[i] - vals[i - 1] : std::numeric_limits<double>::infinity();
        const double gap_hi = i + 1 < kv ? vals[i + 1] - vals[i] : std::numeric_limits<double>::infinity();
        p.cluster_gap = std::min(gap_lo, gap_hi);
        // back transform u = B^{-1/2} v; unit v makes u exactly B-normalized
        p.vector.resize(n);
        for (int j = 0; j < n; ++j)
            p.vector[j] = vecs[i][j] / r.sqw[j];
        // residual against the original pencil
        double rs = 0.0, bn = 0.0;
        for (int j = 0; j < n; ++j) {
            double y = (pencil.diag[j] - p.lambda * pencil.weight[j]) * p.vector[j];
            if (j > 0)
                y += pencil.off[j - 1] * p.vector[j - 1];
            if (j + 1 < n)
                y += pencil.off[j] * p.vector[j + 1];
            rs += y * y;
            const double b = pencil.weight[j] * p.vector[j];
            bn += b * b;
        }
        p.residual = std::sqrt(rs) / std::max(std::sqrt(bn), 1e-300);
    }
    return out;
}

} // namespace collar
