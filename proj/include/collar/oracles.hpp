#pragma once

#include "collar/pencil.hpp"
#include "collar/tracker.hpp"

#include <utility>
#include <vector>

namespace collar {

/// One flat-torus branch: lambda_{m,n}(eps) = 4 pi^2 (m^2/eps^2 + n^2 eps^2).
struct TorusBranch {
    int m = 0;
    int n = 0;
    double lambda = 0.0;
};

/// All branches with |m|, |n| <= max_index at the given eps (exact closed
/// forms; real-analytic in eps).
std::vector<TorusBranch> flat_torus_branches(double eps, int max_index);

/// Exact closed form for a single branch.
double flat_torus_lambda(double eps, int m, int n);

/// The ordered positive spectrum (m = n = 0 excluded), first `count` values;
/// max_index must be large enough that the tail is stable.
std::vector<double> flat_torus_ordered(double eps, int max_index, int count);

/// Diagonal pencil family carrying selected torus branches; positions are
/// mode indices, B = I. Exercises the tracker against exact branches,
/// including permanently degenerate (n, -n) pairs when both signs are listed.
PencilFamily flat_torus_pencil_family(std::vector<std::pair<int, int>> modes);

/// A(eps) = [[eps, delta], [delta, 1 - eps]], B = I. delta = 0 crosses at
/// eps = 1/2; delta > 0 avoids.
PencilFamily avoided_crossing_family(double delta);
double avoided_crossing_lambda(double eps, double delta, int branch); // branch 0 = minus
/// Analytic branches that cross for delta = 0: lambda_1 = eps, lambda_2 = 1-eps
/// (continuation of the eigenvectors e1, e2 rather than the ordered values).
double crossing_analytic_lambda(double eps, int branch);

/// Exact spectrum of -u'' + mu u on an interval of length pi:
/// Dirichlet k^2 + mu (k >= 1), Neumann k^2 + mu (k >= 0).
std::vector<double> flat_sturm_liouville(double mu, Boundary bc, int count);

} // namespace collar
