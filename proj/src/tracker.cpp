#include "collar/tracker.hpp"

#include "collar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collar {

namespace {

// ---- small dense helpers (cluster rotation) --------------------------------

using Mat = std::vector<std::vector<double>>;

Mat mat(int r, int c) { return Mat(r, std::vector<double>(c, 0.0)); }

// eigendecomposition of a small symmetric matrix by cyclic Jacobi
void jacobi_sym(Mat a, std::vector<double>& eval, Mat& evec) {
    const int n = static_cast<int>(a.size());
    evec = mat(n, n);
    for (int i = 0; i < n; ++i)
        evec[i][i] = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                off += a[i][j] * a[i][j];
        if (off < 1e-30)
            break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0)
                    continue;
                const double th = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (th >= 0 ? 1.0 : -1.0) / (std::abs(th) + std::sqrt(th * th + 1));
                const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = evec[i][p], viq = evec[i][q];
                    evec[i][p] = c * vip - s * viq;
                    evec[i][q] = s * vip + c * viq;
                }
            }
    }
    eval.resize(n);
    for (int i = 0; i < n; ++i)
        eval[i] = a[i][i];
}

// orthogonal polar factor of a small square matrix; near-null directions get
// an orthonormal completion (any rotation is acceptable there)
Mat polar_orthogonal(const Mat& g) {
    const int n = static_cast<int>(g.size());
    Mat gtg = mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                gtg[i][j] += g[k][i] * g[k][j];
    std::vector<double> s2;
    Mat v;
    jacobi_sym(gtg, s2, v);
    double smax = 0.0;
    for (double x : s2)
        smax = std::max(smax, x);
    const double floor_ = std::max(smax, 1e-300) * 1e-24;
    Mat u = mat(n, n);
    std::vector<char> good(n, 0);
    for (int j = 0; j < n; ++j) {
        if (s2[j] <= floor_)
            continue;
        const double inv = 1.0 / std::sqrt(s2[j]);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += g[i][k] * v[k][j];
            u[i][j] = acc * inv;
        }
        good[j] = 1;
    }
    for (int j = 0; j < n; ++j) {
        if (good[j])
            continue;
        for (int seed = 0; seed <= n; ++seed) {
            std::vector<double> c(n, 0.0);
            if (seed < n)
                c[seed] = 1.0;
            else
                c.assign(n, 1.0 / std::sqrt(double(n)));
            for (int jj = 0; jj < n; ++jj) {
                if (jj == j || (!good[jj] && jj > j))
                    continue;
                double dot = 0.0;
                for (int i = 0; i < n; ++i)
                    dot += c[i] * u[i][jj];
                for (int i = 0; i < n; ++i)
                    c[i] -= dot * u[i][jj];
            }
            double nn = 0.0;
            for (double x : c)
                nn += x * x;
            if (nn > 1e-8) {
                nn = std::sqrt(nn);
                for (int i = 0; i < n; ++i)
                    u[i][j] = c[i] / nn;
                good[j] = 1;
                break;
            }
        }
    }
    Mat r = mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                r[i][j] += u[i][k] * v[j][k];
    return r;
}

// ---- grid interpolation ------------------------------------------------------

// piecewise-linear evaluation of (positions, values) at t, with implicit zero
// knots at +-T for eliminated Dirichlet boundaries
double interp_at(const OperatorPencil& p, const std::vector<double>& vals, double t) {
    const auto& x = p.positions;
    auto seg = [&](double x0, double v0, double x1, double v1) {
        return v0 + (v1 - v0) * (t - x0) / (x1 - x0);
    };
    if (t <= x.front()) {
        if (p.boundary == Boundary::Dirichlet && t >= -p.halfwidth && x.front() > -p.halfwidth)
            return seg(-p.halfwidth, 0.0, x.front(), vals.front());
        return vals.front();
    }
    if (t >= x.back()) {
        if (p.boundary == Boundary::Dirichlet && t <= p.halfwidth && x.back() < p.halfwidth)
            return seg(x.back(), vals.back(), p.halfwidth, 0.0);
        return vals.back();
    }
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const int i = static_cast<int>(it - x.begin());
    return seg(x[i - 1], vals[i - 1], x[i], vals[i]);
}

bool same_positions(const OperatorPencil& a, const OperatorPencil& b) {
    return a.positions.size() == b.positions.size() &&
           std::equal(a.positions.begin(), a.positions.end(), b.positions.begin());
}

// vectors restricted to a common (coarser) grid, with their B-norms there
struct Restricted {
    std::vector<std::vector<double>> vals;
    std::vector<double> norms;
};

Restricted restrict_vectors(const OperatorPencil& coarse, const OperatorPencil& from,
                            const std::vector<const std::vector<double>*>& vecs) {
    Restricted r;
    const int n = coarse.order();
    const bool identity = same_positions(coarse, from);
    for (const auto* v : vecs) {
        std::vector<double> on(n);
        if (identity)
            on = *v;
        else
            for (int i = 0; i < n; ++i)
                on[i] = interp_at(from, *v, coarse.positions[i]);
        double nn = 0.0;
        for (int i = 0; i < n; ++i)
            nn += coarse.weight[i] * on[i] * on[i];
        r.norms.push_back(std::sqrt(std::max(nn, 1e-300)));
        r.vals.push_back(std::move(on));
    }
    return r;
}

double coarse_dot(const OperatorPencil& coarse, const std::vector<double>& a,
                  const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < coarse.order(); ++i)
        s += coarse.weight[i] * a[i] * b[i];
    return s;
}

struct StepOutcome {
    bool ok = false;
    bool conflict = false;
    bool widen_window = false;
    std::vector<int> matched;
    std::vector<double> matched_overlap;
};

} // namespace

double hellmann_feynman_formula(const OperatorPencil& pencil, const OperatorPencil& dpencil,
                                const std::vector<double>& vec, double lambda) {
    const int n = pencil.order();
    if (static_cast<int>(vec.size()) != n || dpencil.order() != n)
        throw DomainError("hellmann_feynman: size mismatch");
    double bn = 0.0, da = 0.0, db = 0.0;
    for (int i = 0; i < n; ++i) {
        bn += pencil.weight[i] * vec[i] * vec[i];
        da += dpencil.diag[i] * vec[i] * vec[i];
        db += dpencil.weight[i] * vec[i] * vec[i];
        if (i + 1 < n)
            da += 2.0 * dpencil.off[i] * vec[i] * vec[i + 1];
    }
    return (da - lambda * db) / bn;
}

double hellmann_feynman(const OperatorPencil& pencil, const OperatorPencil& dpencil,
                        const EigenPair& pair) {
    const double scale = std::max(std::abs(pair.lambda), 1.0);
    if (pair.cluster_gap < 1e-10 * scale)
        throw DegenerateError("hellmann_feynman: clustered eigenvalue; rotate the cluster basis first");
    return hellmann_feynman_formula(pencil, dpencil, pair.vector, pair.lambda);
}

double grid_overlap(const OperatorPencil& pa, const std::vector<double>& va,
                    const OperatorPencil& pb, const std::vector<double>& vb) {
    const bool a_coarser = pa.positions.size() <= pb.positions.size();
    const OperatorPencil& pc = a_coarser ? pa : pb;
    const OperatorPencil& pf = a_coarser ? pb : pa;
    const auto& vc = a_coarser ? va : vb;
    const auto& vf = a_coarser ? vb : va;
    auto rc = restrict_vectors(pc, pc, {&vc});
    auto rf = restrict_vectors(pc, pf, {&vf});
    return std::abs(coarse_dot(pc, rc.vals[0], rf.vals[0]) / (rc.norms[0] * rf.norms[0]));
}

PencilFamily warped_pencil_family(const WarpedFamily& fam, double mu, const GridPolicy& policy) {
    fam.validate();
    return [fam, mu, policy](double eps) {
        const Grid g = make_grid(fam.halfwidth, eps, policy);
        return PencilSample{assemble(fam, mu, eps, g), assemble_derivative(fam, mu, eps, g)};
    };
}

namespace {

class Tracker {
  public:
    Tracker(const PencilFamily& family, double mu_label, const TrackOptions& opts)
        : family_(family), mu_(mu_label), opts_(opts) {
        if (!(opts.theta > 0.5 && opts.theta < 1.0))
            throw DomainError("track: theta must lie in (0.5, 1)");
        if (!(opts.step_factor > 0.0 && opts.step_factor < 1.0))
            throw DomainError("track: step_factor must lie in (0, 1)");
    }

    TrackResult run(double eps_from, double eps_to, int k,
                    const std::vector<std::vector<double>>* seed_vecs,
                    const std::vector<int>* seed_ids, const OperatorPencil* seed_pencil) {
        if (!(eps_from > 0.0) || !(eps_to > 0.0) || eps_from == eps_to)
            throw DomainError("track: need distinct positive eps endpoints");
        down_ = eps_to < eps_from;

        cur_ = family_(eps_from);
        window_ = k + opts_.window_extra;

        TrackResult out;
        {
            auto sol = solve_window(cur_.op, {});
            if (static_cast<int>(sol.pairs.size()) < k)
                throw DomainError("track: pencil order smaller than requested branch count");
            if (seed_vecs) {
                seed_match(sol, *seed_vecs, *seed_ids, *seed_pencil, out);
            } else {
                for (int i = 0; i < k; ++i) {
                    EigenBranch b;
                    b.id = i;
                    b.mu = mu_;
                    out.branches.push_back(b);
                    active_.push_back({i, std::move(sol.pairs[i].vector), sol.pairs[i].lambda, i});
                }
            }
            store_hints(sol);
            record_samples(out, eps_from, {});
        }

        double eps = eps_from;
        double factor = opts_.step_factor;
        while (!active_.empty() && eps != eps_to) {
            const double cand = down_ ? std::max(eps * factor, eps_to)
                                      : std::min(eps / factor, eps_to);
            if (cand == eps)
                break;
            PencilSample next = family_(cand);
            auto nsol = solve_window(next.op, hint_values_);
            StepOutcome oc = match_step(next, nsol);
            if (oc.widen_window &&
                window_ < static_cast<int>(active_.size()) + opts_.window_extra_max) {
                window_ += 4;
                continue; // same candidate, wider window
            }
            if (!oc.ok) {
                const double next_factor = std::sqrt(factor);
                if (-std::log(next_factor) < opts_.min_rel_step) {
                    finalize_failures(out, oc);
                    factor = opts_.step_factor;
                    continue;
                }
                factor = next_factor;
                continue;
            }
            apply_step(out, cand, next, nsol, oc);
            eps = cand;
            factor = opts_.step_factor;
        }
        for (auto& a : active_) {
            out.terminal_vectors.push_back(std::move(a.vec));
            out.terminal_branch_ids.push_back(out.branches[a.branch].id);
        }
        out.terminal_pencil = cur_.op;
        return out;
    }

  private:
    struct Active {
        int branch;
        std::vector<double> vec;
        double lambda = 0.0;
        int index = 0; // position in the sorted spectrum
    };

    const PencilFamily& family_;
    double mu_;
    TrackOptions opts_;
    bool down_ = true;
    PencilSample cur_;
    std::vector<Active> active_;
    std::vector<double> hint_values_;
    int window_ = 0;

    SolveResult solve_window(const OperatorPencil& p, const std::vector<double>& hints) {
        SolveOptions o;
        o.rel_tol = opts_.solver_tol;
        o.hints = hints;
        return lowest_eigenpairs(p, std::min(window_, p.order()), o);
    }

    void store_hints(const SolveResult& sol) {
        hint_values_.clear();
        for (const auto& p : sol.pairs)
            hint_values_.push_back(p.lambda);
    }

    // Overlap matrix between reference vectors (on pen_ref) and the window of
    // nsol (on pen_new); degenerate clusters of nsol are rotated in place to
    // best align with the references, and the matrix reflects the rotation.
    Mat align_and_overlap(const OperatorPencil& pen_ref,
                          const std::vector<const std::vector<double>*>& refs,
                          const OperatorPencil& pen_new, SolveResult& nsol) {
        const OperatorPencil& coarse =
            pen_ref.positions.size() <= pen_new.positions.size() ? pen_ref : pen_new;
        Restricted rref = restrict_vectors(coarse, pen_ref, refs);
        std::vector<const std::vector<double>*> newvecs;
        for (const auto& p : nsol.pairs)
            newvecs.push_back(&p.vector);
        Restricted rnew = restrict_vectors(coarse, pen_new, newvecs);

        const int na = static_cast<int>(refs.size());
        const int nw = static_cast<int>(nsol.pairs.size());
        Mat s = mat(na, nw);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < nw; ++j)
                s[i][j] = coarse_dot(coarse, rref.vals[i], rnew.vals[j]) /
                          (rref.norms[i] * rnew.norms[j]);

        for (auto [c0, c1] : nsol.clusters) {
            const int cs = c1 - c0;
            std::vector<int> owners;
            for (int i = 0; i < na && static_cast<int>(owners.size()) < cs; ++i) {
                double massin = 0.0;
                for (int j = c0; j < c1; ++j)
                    massin += s[i][j] * s[i][j];
                if (massin >= 0.25)
                    owners.push_back(i);
            }
            if (owners.empty())
                continue;
            Mat g = mat(cs, cs);
            for (std::size_t oi = 0; oi < owners.size(); ++oi)
                for (int c = 0; c < cs; ++c)
                    g[c][oi] = s[owners[oi]][c0 + c];
            const Mat r = polar_orthogonal(g);

            // rotate solver vectors and their restrictions, then refresh S
            const int n_new = pen_new.order();
            std::vector<std::vector<double>> rot_full(cs, std::vector<double>(n_new, 0.0));
            std::vector<std::vector<double>> rot_res(cs, std::vector<double>(coarse.order(), 0.0));
            for (int j = 0; j < cs; ++j)
                for (int c = 0; c < cs; ++c) {
                    const double rc = r[c][j];
                    if (rc == 0.0)
                        continue;
                    const auto& full = nsol.pairs[c0 + c].vector;
                    for (int i = 0; i < n_new; ++i)
                        rot_full[j][i] += rc * full[i];
                    const auto& res = rnew.vals[c0 + c];
                    for (int i = 0; i < coarse.order(); ++i)
                        rot_res[j][i] += rc * res[i];
                }
            for (int j = 0; j < cs; ++j) {
                nsol.pairs[c0 + j].vector = std::move(rot_full[j]);
                rnew.vals[c0 + j] = std::move(rot_res[j]);
                double nn = 0.0;
                for (int i = 0; i < coarse.order(); ++i)
                    nn += coarse.weight[i] * rnew.vals[c0 + j][i] * rnew.vals[c0 + j][i];
                rnew.norms[c0 + j] = std::sqrt(std::max(nn, 1e-300));
            }
            for (int i = 0; i < na; ++i)
                for (int j = c0; j < c1; ++j)
                    s[i][j] = coarse_dot(coarse, rref.vals[i], rnew.vals[j]) /
                              (rref.norms[i] * rnew.norms[j]);
        }
        return s;
    }

    StepOutcome greedy_match(const Mat& s, int full_order) {
        const int na = static_cast<int>(s.size());
        const int nw = na ? static_cast<int>(s[0].size()) : 0;
        StepOutcome oc;
        oc.matched.assign(na, -1);
        oc.matched_overlap.assign(na, 0.0);
        std::vector<char> row_done(na, 0), col_done(nw, 0);
        for (int pick = 0; pick < na; ++pick) {
            double best = -1.0;
            int bi = -1, bj = -1;
            for (int i = 0; i < na; ++i) {
                if (row_done[i])
                    continue;
                for (int j = 0; j < nw; ++j) {
                    if (col_done[j])
                        continue;
                    const double o = std::abs(s[i][j]);
                    if (o > best) {
                        best = o;
                        bi = i;
                        bj = j;
                    }
                }
            }
            if (bi < 0)
                break;
            row_done[bi] = 1;
            col_done[bj] = 1;
            oc.matched[bi] = bj;
            oc.matched_overlap[bi] = best;
        }
        oc.ok = true;
        for (int i = 0; i < na; ++i) {
            if (oc.matched[i] < 0 || oc.matched_overlap[i] < opts_.theta) {
                oc.ok = false;
                for (int j = 0; j < nw; ++j)
                    if (col_done[j] && std::abs(s[i][j]) >= opts_.theta &&
                        std::abs(s[i][j]) > oc.matched_overlap[i] + 1e-12)
                        oc.conflict = true;
            }
            // a branch sitting at the very top of the window may have risen
            // past it; only meaningful when the window is a strict subset
            if (oc.matched[i] >= nw - 1 && nw < full_order)
                oc.widen_window = true;
        }
        return oc;
    }

    StepOutcome match_step(const PencilSample& next, SolveResult& nsol) {
        std::vector<const std::vector<double>*> refs;
        for (const auto& a : active_)
            refs.push_back(&a.vec);
        const Mat s = align_and_overlap(cur_.op, refs, next.op, nsol);
        StepOutcome oc = greedy_match(s, next.op.order());
        if (!oc.ok || oc.widen_window)
            return oc;
        // Sturm audit: eigenvalue counts between tracked branches must match
        std::vector<int> old_idx, new_idx;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            old_idx.push_back(active_[i].index);
            new_idx.push_back(oc.matched[i]);
        }
        std::sort(old_idx.begin(), old_idx.end());
        std::sort(new_idx.begin(), new_idx.end());
        for (std::size_t i = 1; i < old_idx.size(); ++i)
            if (new_idx[i] - new_idx[i - 1] != old_idx[i] - old_idx[i - 1]) {
                oc.ok = false;
                return oc;
            }
        return oc;
    }

    void seed_match(SolveResult& sol, const std::vector<std::vector<double>>& seeds,
                    const std::vector<int>& ids, const OperatorPencil& seed_pencil,
                    TrackResult& out) {
        std::vector<const std::vector<double>*> refs;
        for (const auto& v : seeds)
            refs.push_back(&v);
        const Mat s = align_and_overlap(seed_pencil, refs, cur_.op, sol);
        StepOutcome oc = greedy_match(s, cur_.op.order());
        for (std::size_t i = 0; i < seeds.size(); ++i)
            if (oc.matched[i] < 0)
                throw SolverError("track: seed basis does not match the initial spectrum window");
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            EigenBranch b;
            b.id = ids[i];
            b.mu = mu_;
            out.branches.push_back(b);
            const int col = oc.matched[i];
            active_.push_back({static_cast<int>(i), std::move(sol.pairs[col].vector),
                               sol.pairs[col].lambda, col});
        }
    }

    void record_samples(TrackResult& out, double eps, const std::vector<double>& overlaps) {
        for (std::size_t i = 0; i < active_.size(); ++i) {
            BranchSample s;
            s.eps = eps;
            s.lambda = active_[i].lambda;
            s.dlambda =
                hellmann_feynman_formula(cur_.op, cur_.dop, active_[i].vec, active_[i].lambda);
            s.overlap = overlaps.empty() ? 1.0 : overlaps[i];
            out.branches[active_[i].branch].samples.push_back(s);
        }
    }

    void apply_step(TrackResult& out, double eps, PencilSample& next, SolveResult& nsol,
                    const StepOutcome& oc) {
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const int col = oc.matched[i];
            active_[i].vec = std::move(nsol.pairs[col].vector);
            active_[i].lambda = nsol.pairs[col].lambda;
            active_[i].index = col;
        }
        cur_ = std::move(next);
        store_hints(nsol);
        record_samples(out, eps, oc.matched_overlap);
    }

    // Terminal rejection at the minimal step: drop the branches that failed to
    // match (STEP_UNDERFLOW, or LOST on an assignment conflict). A pure
    // Sturm-audit failure names no branch; everything stops there.
    void finalize_failures(TrackResult& out, const StepOutcome& oc) {
        std::vector<Active> keep;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const bool failed = oc.matched.empty() || oc.matched[i] < 0 ||
                                oc.matched_overlap[i] < opts_.theta;
            if (failed)
                out.branches[active_[i].branch].status =
                    oc.conflict ? BranchStatus::Lost : BranchStatus::StepUnderflow;
            else
                keep.push_back(std::move(active_[i]));
        }
        if (keep.size() == active_.size()) {
            for (const auto& a : active_)
                out.branches[a.branch].status = BranchStatus::StepUnderflow;
            keep.clear();
        }
        active_ = std::move(keep);
    }
};

} // namespace

TrackResult track(const PencilFamily& family, double mu_label, double eps_from, double eps_to,
                  int k_branches, const TrackOptions& opts) {
    if (k_branches < 1)
        throw DomainError("track: k_branches must be >= 1");
    Tracker t(family, mu_label, opts);
    return t.run(eps_from, eps_to, k_branches, nullptr, nullptr, nullptr);
}

TrackResult track_seeded(const PencilFamily& family, double mu_label, double eps_from,
                         double eps_to, const std::vector<std::vector<double>>& seed_vectors,
                         const std::vector<int>& seed_ids, const OperatorPencil& seed_pencil,
                         const TrackOptions& opts) {
    if (seed_vectors.empty() || seed_vectors.size() != seed_ids.size())
        throw DomainError("track_seeded: seed basis and ids must be nonempty and aligned");
    Tracker t(family, mu_label, opts);
    return t.run(eps_from, eps_to, static_cast<int>(seed_vectors.size()), &seed_vectors,
                 &seed_ids, &seed_pencil);
}

TrackResult track(const WarpedFamily& fam, double mu, double eps_from, double eps_to,
                  int k_branches, const GridPolicy& policy, const TrackOptions& opts) {
    auto pf = warped_pencil_family(fam, mu, policy);
    return track(pf, mu, eps_from, eps_to, k_branches, opts);
}

} // namespace collar
