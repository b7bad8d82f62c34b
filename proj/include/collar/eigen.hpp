#pragma once

#include "collar/pencil.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace collar {

/// One converged generalized eigenpair of (A, B). The vector is B-normalized
/// (u^T B u = 1). cluster_gap is the distance to the nearest other computed
/// eigenvalue (the solver always resolves one value beyond the requested k,
/// so the top pair has a meaningful gap too).
struct EigenPair {
    double lambda = 0.0;
    std::vector<double> vector;
    double residual = 0.0;    // ||A u - lambda B u|| / ||B u||
    double cluster_gap = 0.0;
};

struct SolveOptions {
    double rel_tol = 1e-10;        // bisection width, relative to eigenvalue scale
    double cluster_rel_gap = 1e-12; // gap/scale below which values form a cluster
    int max_restarts = 8;           // inverse-iteration restarts per vector
    /// Optional warm-start guesses for the lowest values (from a nearby pencil);
    /// each is verified with Sturm counts and widened or dropped if stale.
    std::vector<double> hints;
};

struct SolveResult {
    std::vector<EigenPair> pairs;                 // ascending
    std::vector<std::pair<int, int>> clusters;    // half-open index ranges, size >= 2 only
};

/// The k algebraically smallest generalized eigenvalues of (A, B) with
/// B-normalized eigenvectors. Bisection on Sturm counts gives certified
/// indices; inverse iteration recovers vectors, with reorthogonalization
/// inside clusters. Throws SolverError on non-convergence.
SolveResult lowest_eigenpairs(const OperatorPencil& pencil, int k, const SolveOptions& opts = {});

/// Number of generalized eigenvalues of (A, B) strictly below x.
int sturm_count_below(const OperatorPencil& pencil, double x);

} // namespace collar
