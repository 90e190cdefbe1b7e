#pragma once

// Small statistics helpers used by the capacity and hitting estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fraclap/common.hpp"

namespace fraclap::stats {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    std::size_t n = 0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("least_squares: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("least_squares: degenerate abscissa (zero variance)");
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
    }
    fit.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    if (n > 2 && sxx > 0.0) fit.slope_se = std::sqrt(ss_res / (static_cast<double>(n - 2) * sxx));
    return fit;
}

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Binomial proportion confidence interval. Wilson score for interior counts;
// exact one-sided endpoints when the count is 0 or n (so that zero-hit runs
// carry a meaningful upper bound).
inline Interval binomial_ci(std::uint64_t hits, std::uint64_t trials, double conf = 0.95)
{
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double tail = 0.5 * (1.0 - conf);
    if (hits == 0) return {0.0, 1.0 - std::pow(tail, 1.0 / n)};
    if (hits == trials) return {std::pow(tail, 1.0 / n), 1.0};
    // z for the two-sided confidence level (1.96 at 95%); Abramowitz-Stegun
    // 26.2.23 rational approximation of the normal tail quantile.
    const double q = std::sqrt(-2.0 * std::log(tail));
    const double z = q - (2.515517 + 0.802853 * q + 0.010328 * q * q) /
                             (1.0 + 1.432788 * q + 0.189269 * q * q + 0.001308 * q * q * q);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Upper bound on the success probability after observing zero hits in n
// trials (exact binomial, two-sided 95% convention: 1 - 0.025^{1/n}).
inline double zero_hit_upper_bound(std::uint64_t trials, double conf = 0.95)
{
    if (trials == 0) return 1.0;
    return 1.0 - std::pow(0.5 * (1.0 - conf), 1.0 / static_cast<double>(trials));
}

// One Aitken delta-squared step on the tail of a sequence; falls back to the
// last element when the contraction is degenerate.
inline double aitken_limit(std::span<const double> seq)
{
    const std::size_t n = seq.size();
    if (n == 0) throw std::invalid_argument("aitken_limit: empty sequence");
    if (n < 3) return seq[n - 1];
    const double a = seq[n - 3], b = seq[n - 2], c = seq[n - 1];
    const double denom = (c - b) - (b - a);
    if (std::fabs(denom) < 1e-14 * (std::fabs(c) + 1e-300)) return c;
    const double lim = c - (c - b) * (c - b) / denom;
    // Reject wild extrapolations (non-contracting tails).
    if (!std::isfinite(lim) || std::fabs(lim - c) > std::fabs(c - b) * 10.0 + 1e-12) return c;
    return lim;
}

// Survival function of chi-squared with k degrees of freedom, small k only.
inline double chi2_sf(double x, int k)
{
    if (x <= 0.0) return 1.0;
    switch (k) {
        case 1: return std::erfc(std::sqrt(0.5 * x));
        case 2: return std::exp(-0.5 * x);
        case 3: return std::erfc(std::sqrt(0.5 * x)) + std::sqrt(2.0 * x / math::pi) * std::exp(-0.5 * x);
        default: throw std::invalid_argument("chi2_sf: unsupported dof");
    }
}

// Kolmogorov-Smirnov two-sample p-value (asymptotic Kolmogorov distribution).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) throw std::invalid_argument("ks_two_sample_pvalue: empty sample");
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        const double v = (a[i] <= b[j]) ? a[i] : b[j];
        while (i < n && a[i] <= v) ++i;
        while (j < m && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double ne = std::sqrt(static_cast<double>(n) * m / static_cast<double>(n + m));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, p));
}

} // namespace fraclap::stats
