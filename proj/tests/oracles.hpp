#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fraclap/capacity.hpp"
#include "fraclap/kernels.hpp"

namespace oracles {

// Discrete equilibrium by direct linear solve of the full-support
// potential-equalization system  [K 1; 1^T 0][w; lambda] = [0; 1]
// (Gaussian elimination). Valid when the resulting weights are nonnegative;
// an entirely different algorithm from the projected-gradient solver.
struct QpOracleResult {
    std::vector<double> weights;
    double off_diagonal_energy = 0.0;
    bool full_support = false;
};

inline QpOracleResult equilibrium_linear_solve(const double* coords, std::size_t n, int dim,
                                               const fraclap::kernels::RadialKernel& kernel)
{
    using fraclap::sets::detail::dist_point;
    const std::size_t m = n + 1;
    std::vector<double> a(m * m, 0.0), b(m, 0.0);
    std::vector<double> K(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = dist_point(coords + i * dim, coords + j * dim, dim);
            nearest = std::min(nearest, r);
            K[i * n + j] = kernel(r);
        }
        K[i * n + i] = (n > 1) ? kernel(0.5 * nearest) : 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * m + j] = K[i * n + j];
        a[i * m + n] = 1.0;
        a[n * m + i] = 1.0;
    }
    b[n] = 1.0;
    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r * m + col]) > std::fabs(a[piv * m + col])) piv = r;
        if (a[piv * m + col] == 0.0) throw std::runtime_error("qp oracle: singular system");
        if (piv != col) {
            for (std::size_t j = 0; j < m; ++j) std::swap(a[col * m + j], a[piv * m + j]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = a[r * m + col] / a[col * m + col];
            for (std::size_t j = col; j < m; ++j) a[r * m + j] -= f * a[col * m + j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < m; ++j) s -= a[i * m + j] * x[j];
        x[i] = s / a[i * m + i];
    }
    QpOracleResult res;
    res.weights.assign(x.begin(), x.begin() + n);
    res.full_support = true;
    for (double w : res.weights) res.full_support = res.full_support && (w >= -1e-12);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) e += res.weights[i] * res.weights[j] * K[i * n + j];
    res.off_diagonal_energy = e;
    return res;
}

// Reflection-principle value for Brownian motion in d = 1: probability of
// reaching 0 from x = 1 by time 1 is 2(1 - Phi(1)).
inline double reflection_hit_probability() { return 2.0 * (1.0 - fraclap::math::normal_cdf(1.0)); }

} // namespace oracles
