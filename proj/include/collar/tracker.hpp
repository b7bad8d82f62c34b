#pragma once

#include "collar/eigen.hpp"
#include "collar/pencil.hpp"

#include <functional>
#include <vector>

namespace collar {

/// A pencil and its eps-derivative at one parameter value.
struct PencilSample {
    OperatorPencil op;
    OperatorPencil dop;
};

/// Abstract eps -> pencil family. Warped families, the 2x2 crossing testbed
/// and diagonal oracle families all present themselves through this.
using PencilFamily = std::function<PencilSample(double)>;

/// PencilFamily for one fiber sector of a warped family (grid follows eps).
PencilFamily warped_pencil_family(const WarpedFamily& fam, double mu, const GridPolicy& policy);

struct BranchSample {
    double eps = 0.0;
    double lambda = 0.0;
    double dlambda = 0.0; // Hellmann-Feynman derivative at this sample
    double overlap = 1.0; // eigenvector overlap with the previous sample
};

enum class BranchStatus { Complete, StepUnderflow, Lost };

/// One continued branch: eps strictly monotone along samples, every accepted
/// overlap >= theta.
struct EigenBranch {
    int id = 0;
    double mu = 0.0; // fiber sector label
    std::vector<BranchSample> samples;
    BranchStatus status = BranchStatus::Complete;
};

struct TrackOptions {
    double theta = 0.9;          // overlap acceptance threshold, in (0.5, 1)
    double step_factor = 0.95;   // geometric eps step
    double min_rel_step = 1e-4;  // smallest |log| step before giving up
    int window_extra = 4;        // eigenpairs solved beyond the tracked count
    int window_extra_max = 16;
    double solver_tol = 1e-13;
};

/// Terminal state is kept so a run can be resumed or reversed.
struct TrackResult {
    std::vector<EigenBranch> branches;
    std::vector<std::vector<double>> terminal_vectors; // one per surviving branch
    std::vector<int> terminal_branch_ids;
    OperatorPencil terminal_pencil;
};

/// Continues the k lowest branches at eps_from through to eps_to (either
/// direction). Steps geometrically; on a failed eigenvector match the step
/// is halved in log scale; below min_rel_step the offending branch is marked
/// STEP_UNDERFLOW (or LOST on an unresolvable assignment conflict) and the
/// rest continue. Crossing handling: greedy matching on the B-inner-product
/// overlap matrix, with an orthogonal (Procrustes) rotation inside flagged
/// degenerate clusters. A Sturm-count audit rejects steps whose between-branch
/// eigenvalue counts change (no silent branch swaps).
TrackResult track(const PencilFamily& family, double mu_label, double eps_from, double eps_to,
                  int k_branches, const TrackOptions& opts = {});

/// Same, seeded with an explicit starting basis (used for reversibility
/// checks and resuming).
TrackResult track_seeded(const PencilFamily& family, double mu_label, double eps_from,
                         double eps_to, const std::vector<std::vector<double>>& seed_vectors,
                         const std::vector<int>& seed_ids, const OperatorPencil& seed_pencil,
                         const TrackOptions& opts = {});

/// Convenience overload for one fiber sector of a warped family.
TrackResult track(const WarpedFamily& fam, double mu, double eps_from, double eps_to,
                  int k_branches, const GridPolicy& policy = {}, const TrackOptions& opts = {});

/// lambda' = v^T (A' - lambda B') v for a B-normalized eigenvector. Throws
/// DegenerateError when the pair sits in a cluster (gap < 1e-10 * scale);
/// first-order perturbation needs the rotated cluster basis in that case,
/// which track() maintains internally.
double hellmann_feynman(const OperatorPencil& pencil, const OperatorPencil& dpencil,
                        const EigenPair& pair);

/// The raw first-order formula with no degeneracy gate (cluster-rotated
/// vectors may be passed here).
double hellmann_feynman_formula(const OperatorPencil& pencil, const OperatorPencil& dpencil,
                                const std::vector<double>& vec, double lambda);

/// Overlap |<a, b>_B| of two grid functions, computed in the B-inner product
/// of the coarser grid with linear interpolation of the finer one; both
/// factors are normalized in that inner product.
double grid_overlap(const OperatorPencil& pa, const std::vector<double>& va,
                    const OperatorPencil& pb, const std::vector<double>& vb);

} // namespace collar
