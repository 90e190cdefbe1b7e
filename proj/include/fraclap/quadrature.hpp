#pragma once

// Adaptive quadrature building blocks:
//  * Gauss-Kronrod 7-15 panel rule with error estimate,
//  * adaptive bisection on finite intervals,
//  * geometric panel sweeps toward an endpoint singularity at 0 and toward
//    infinity for exponentially decaying tails,
//  * an oscillatory driver that integrates between consecutive zeros of the
//    oscillating factor and accelerates the alternating partial sums.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fraclap/common.hpp"

namespace fraclap::quad {

namespace detail {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] (embedded Gauss-7).
inline constexpr double gk_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};

inline constexpr double gk_weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};

inline constexpr double gauss7_weights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};

} // namespace detail

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
PanelResult gk15(const F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fx = f(c + h * detail::gk_nodes[i]);
        kron += detail::gk_weights[i] * fx;
        if (i % 2 == 1) gauss += detail::gauss7_weights[i / 2] * fx;
    }
    PanelResult r;
    r.value = kron * h;
    const double diff = std::fabs(kron - gauss) * std::fabs(h);
    r.error = std::pow(200.0 * diff, 1.5);
    if (!std::isfinite(r.error) || r.error > diff) r.error = diff;
    return r;
}

// Adaptive bisection on [a,b]. Throws numeric_error if the tolerance cannot
// be reached within the subdivision budget.
template <class F>
double adaptive(const F& f, double a, double b, double rel_tol = 1e-10, double abs_floor = 1e-300,
                int max_depth = 48)
{
    struct Seg {
        double a, b, value, error;
        int depth;
    };
    PanelResult first = gk15(f, a, b);
    std::vector<Seg> stack{{a, b, first.value, first.error, 0}};
    double total = first.value;
    double total_err = first.error;
    std::size_t splits = 0;
    while (total_err > rel_tol * std::max(std::fabs(total), abs_floor)) {
        // pop the worst segment
        std::size_t worst = 0;
        for (std::size_t i = 1; i < stack.size(); ++i)
            if (stack[i].error > stack[worst].error) worst = i;
        Seg s = stack[worst];
        if (s.depth >= max_depth || ++splits > 200000)
            throw numeric_error("adaptive quadrature failed to converge");
        stack[worst] = stack.back();
        stack.pop_back();
        const double m = 0.5 * (s.a + s.b);
        PanelResult left = gk15(f, s.a, m);
        PanelResult right = gk15(f, m, s.b);
        total += left.value + right.value - s.value;
        total_err += left.error + right.error - s.error;
        stack.push_back({s.a, m, left.value, left.error, s.depth + 1});
        stack.push_back({m, s.b, right.value, right.error, s.depth + 1});
    }
    return total;
}

// Integral over (0, b] for integrands with an integrable singularity or
// unbounded variation toward 0: geometric panels b*2^{-k-1}..b*2^{-k}.
template <class F>
double integrate_from_zero(const F& f, double b, double rel_tol = 1e-9, int max_panels = 2000)
{
    double total = 0.0;
    double hi = b;
    for (int k = 0; k < max_panels; ++k) {
        const double lo = 0.5 * hi;
        const double part = adaptive(f, lo, hi, 0.1 * rel_tol);
        total += part;
        if (k > 8 && std::fabs(part) < rel_tol * std::fabs(total)) return total;
        if (hi < 1e-300) return total;
        hi = lo;
    }
    throw numeric_error("integrate_from_zero: panel budget exhausted");
}

// Integral over [a, +inf) for integrands that eventually decay fast:
// geometric panels a*2^k..a*2^{k+1}.
template <class F>
double integrate_to_infinity(const F& f, double a, double rel_tol = 1e-9, int max_panels = 2000)
{
    double total = 0.0;
    double lo = a;
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        const double hi = 2.0 * lo;
        const double part = adaptive(f, lo, hi, 0.1 * rel_tol);
        total += part;
        if (std::fabs(part) < rel_tol * std::max(std::fabs(total), 1e-300)) {
            if (++quiet >= 2) return total;
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    throw numeric_error("integrate_to_infinity: panel budget exhausted");
}

// Oscillatory integral over [a, +inf): `breaks(k)` returns the k-th break
// point (typically zeros of the oscillating factor, increasing to +inf).
// Segment integrals form an (eventually) alternating series; partial sums
// are accelerated with an iterated Aitken transform.
template <class F, class Breaks>
double integrate_oscillatory(const F& f, double a, const Breaks& breaks, double rel_tol = 1e-8,
                             int max_segments = 256)
{
    std::vector<double> partial;
    partial.reserve(64);
    double total = 0.0;
    double prev = a;
    int idx = 0;
    auto accelerated = [&](double& est, double& spread) {
        std::vector<double> row(partial.end() - std::min<std::size_t>(partial.size(), 24), partial.end());
        while (row.size() >= 3) {
            std::vector<double> next;
            next.reserve(row.size() - 2);
            for (std::size_t i = 0; i + 2 < row.size(); ++i) {
                const double denom = row[i + 2] - 2.0 * row[i + 1] + row[i];
                if (std::fabs(denom) < 1e-300)
                    next.push_back(row[i + 2]);
                else
                    next.push_back(row[i + 2] - (row[i + 2] - row[i + 1]) * (row[i + 2] - row[i + 1]) / denom);
            }
            row.swap(next);
        }
        est = row.back();
        spread = 0.0;
        for (double v : row) spread = std::max(spread, std::fabs(v - est));
    };
    while (idx < max_segments) {
        double next_break = breaks(idx);
        ++idx;
        if (next_break <= prev) continue;
        total += adaptive(f, prev, next_break, 1e-3 * rel_tol);
        prev = next_break;
        partial.push_back(total);
        if (partial.size() >= 12) {
            double est = 0.0, spread = 0.0;
            accelerated(est, spread);
            const double scale = std::max(std::fabs(est), 1e-300);
            if (spread < rel_tol * scale) return est;
        }
    }
    throw numeric_error("integrate_oscillatory: no convergence within segment budget");
}

} // namespace fraclap::quad
