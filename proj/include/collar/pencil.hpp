#pragma once

#include "collar/profiles.hpp"

#include <iosfwd>
#include <vector>

namespace collar {

enum class Boundary { Dirichlet, Neumann };

/// One fiber eigenvalue of Delta_h with its multiplicity.
struct FiberMode {
    double mu = 0.0;
    int multiplicity = 1;
};

/// The degenerating family: profile, exponents, fiber spectrum, model
/// interval [-T, T] and cap boundary condition. Separation of variables
/// reduces the Laplacian to one radial operator -L + mu rho^{-2b} per mu.
struct WarpedFamily {
    ProfileFunction profile;
    ExponentData exp;
    std::vector<FiberMode> fiber_spectrum; // ascending, mu_0 = 0 first
    double halfwidth = 1.0;                // T
    Boundary boundary = Boundary::Dirichlet;

    /// Checks the fiber-spectrum contract (sorted, mu_0 = 0, mu_1 > 0) and T > 0.
    void validate() const;
    /// Smallest nonzero fiber eigenvalue.
    double mu1() const;
};

/// Fiber spectrum of a circle of given length: mu_n = (2 pi n / length)^2,
/// multiplicity 2 for n >= 1. Modes n = 0..max_mode.
std::vector<FiberMode> circle_fiber(double length, int max_mode);

/// Fiber spectrum of the square flat 2-torus of side `side`:
/// mu = (2 pi / side)^2 (p^2 + q^2), multiplicity by lattice count,
/// all values with p^2 + q^2 <= max_sum.
std::vector<FiberMode> torus2_fiber(double side, int max_sum);

struct GridPolicy {
    int n_min = 101;
    double points_per_eps = 50.0;
    int n_cap = 2'000'000; // reject finer grids
};

/// Uniform symmetric grid on [-T, T]; node count odd so t = 0 is a node.
struct Grid {
    std::vector<double> nodes;
    double spacing = 0.0;
};

/// n = max(n_min, ceil(points_per_eps * T / eps)), bumped to odd. Guarantees
/// at least points_per_eps nodes across |t| <= eps. Throws NumericalError
/// when the requested eps would exceed the grid cap.
Grid make_grid(double T, double eps, const GridPolicy& policy = {});

/// Symmetric tridiagonal pencil (A, B): A = stiffness + fiber potential in
/// flux (divergence) form, B = diag(rho^{a+bd} * cell). Dirichlet rows are
/// eliminated; Neumann boundaries get half cells with reflected flux.
struct OperatorPencil {
    std::vector<double> diag;      // A diagonal, length n
    std::vector<double> off;       // A off-diagonal, length n-1
    std::vector<double> weight;    // B diagonal, positive, length n
    std::vector<double> positions; // t-coordinate of each unknown
    double eps = 0.0;
    double mu = 0.0;
    double halfwidth = 0.0;
    Boundary boundary = Boundary::Dirichlet;
    std::string family_id;

    int order() const { return static_cast<int>(diag.size()); }
};

/// Discretizes -L u + mu rho^{-2b} u = lambda u against the volume weight.
/// Flux coefficients rho^{-a+bd} are sampled at cell midpoints, so A is
/// symmetric by construction.
OperatorPencil assemble(const WarpedFamily& fam, double mu, double eps, const Grid& grid);

/// Element-wise d/d eps of (A, B), same sparsity. Uses the profile chain rule
/// d_eps rho^c = c rho^{c-1} rho_eps.
OperatorPencil assemble_derivative(const WarpedFamily& fam, double mu, double eps, const Grid& grid);

/// Debug text format: three columns (diag, offdiag, weight), offdiag padded
/// with 0 on the last row.
void write_pencil(std::ostream& os, const OperatorPencil& p);

} // namespace collar
