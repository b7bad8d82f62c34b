#pragma once

// Test-only helpers. The dense Jacobi solver is the independent oracle for
// the tridiagonal solver; it must stay independent of src/eigen.cpp.

#include "collar/pencil.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testutil {

// Classic cyclic Jacobi rotations on a dense symmetric matrix; returns the
// eigenvalues in ascending order.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> m) {
    const int n = static_cast<int>(m.size());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                off += m[i][j] * m[i][j];
        if (off < 1e-28 * double(n) * double(n))
            break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (m[p][q] == 0.0)
                    continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double mip = m[i][p], miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for (int i = 0; i < n; ++i) {
                    const double mpi = m[p][i], mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i)
        ev[i] = m[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Dense eigenvalues of the generalized pencil via the same B^{1/2} reduction
// written out longhand (dense), then Jacobi.
inline std::vector<double> dense_pencil_eigenvalues(const collar::OperatorPencil& p) {
    const int n = p.order();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        m[i][i] = p.diag[i] / p.weight[i];
        if (i + 1 < n) {
            const double e = p.off[i] / std::sqrt(p.weight[i] * p.weight[i + 1]);
            m[i][i + 1] = m[i + 1][i] = e;
        }
    }
    return jacobi_eigenvalues(m);
}

// small deterministic PRNG for test data
struct Lcg {
    std::uint64_t s;
    explicit Lcg(std::uint64_t seed) : s(seed) {}
    double uniform() { // in (-1, 1)
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return double(std::int64_t(s >> 11)) / double(1ll << 52) - 1.0;
    }
};

// synthetic tridiagonal pencil with B = I on positions 0..n-1
inline collar::OperatorPencil synthetic_tridiag(int n, std::uint64_t seed, double diag_shift = 4.0) {
    Lcg rng(seed);
    collar::OperatorPencil p;
    p.diag.resize(n);
    p.off.resize(n - 1);
    p.weight.assign(n, 1.0);
    p.positions.resize(n);
    for (int i = 0; i < n; ++i) {
        p.diag[i] = diag_shift + rng.uniform();
        p.positions[i] = i;
        if (i + 1 < n)
            p.off[i] = rng.uniform();
    }
    return p;
}

} // namespace testutil
