#pragma once

// Samplers for Brownian motion, one-sided stable subordinators, isotropic
// alpha-stable increments by subordination, and the two-parameter Brownian
// sheet.
//
// Normalization: an isotropic alpha-stable increment over time dt has
// characteristic function exp(-2^{-alpha/2} dt |xi|^alpha). That matches
// Brownian motion exactly at alpha = 2 (variance dt per coordinate) and is
// produced for alpha < 2 by v = sqrt(S) Z with Z standard Gaussian and S a
// one-sided (alpha/2)-stable variable with E[e^{-lambda S}] =
// exp(-dt lambda^{alpha/2}). The more common exp(-t|xi|^alpha) convention
// differs only by the deterministic time change t -> 2^{alpha/2} t.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "fraclap/common.hpp"
#include "fraclap/rng.hpp"

namespace fraclap::levy {

// One-sided beta-stable increment, E[e^{-lambda S}] = e^{-dt lambda^beta};
// Kanter's rejection-free representation of the Chambers-Mallows-Stuck
// sampler for beta in (0,1).
inline double sample_subordinator_increment(double beta, double dt, rng::Stream& rng)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("sample_subordinator_increment: beta must be in (0,1)");
    if (!(dt > 0.0)) throw std::invalid_argument("sample_subordinator_increment: dt must be > 0");
    const double u = rng.uniform(0.0, math::pi);
    const double w = rng.exponential();
    const double su = std::sin(u);
    const double a = std::pow(std::sin(beta * u) / su, beta / (1.0 - beta)) * (std::sin((1.0 - beta) * u) / su);
    const double s = std::pow(a / w, (1.0 - beta) / beta);
    return std::pow(dt, 1.0 / beta) * s;
}

// Isotropic alpha-stable increment over time dt in R^d, written into out[0..d).
inline void sample_stable_increment(double alpha, double dt, int d, rng::Stream& rng, double* out)
{
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw std::invalid_argument("sample_stable_increment: alpha must be in (0,2]");
    if (!(dt > 0.0)) throw std::invalid_argument("sample_stable_increment: dt must be > 0");
    if (d < 1) throw std::invalid_argument("sample_stable_increment: d must be >= 1");
    if (alpha == 2.0) {
        const double s = std::sqrt(dt);
        for (int i = 0; i < d; ++i) out[i] = s * rng.normal();
        return;
    }
    const double subordinate = sample_subordinator_increment(0.5 * alpha, dt, rng);
    const double s = std::sqrt(subordinate);
    for (int i = 0; i < d; ++i) out[i] = s * rng.normal();
}

struct PathConfig {
    double alpha = 2.0;
    int dim = 1;
    double horizon = 1.0;
    double dt = 1e-2;
    std::vector<double> start; // defaults to the origin

    std::size_t n_steps() const { return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12)); }

    void validate() const
    {
        if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("PathConfig: alpha must be in (0,2]");
        if (dim < 1) throw std::invalid_argument("PathConfig: dim must be >= 1");
        if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon)
            throw std::invalid_argument("PathConfig: need 0 < dt <= horizon");
        if (!start.empty() && static_cast<int>(start.size()) != dim)
            throw std::invalid_argument("PathConfig: start point dimension mismatch");
    }
};

// Cumulative sum of independent stationary increments on the uniform grid;
// returns a flat (n_steps+1) x dim array with path(0) = start.
inline std::vector<double> simulate_path(const PathConfig& cfg, rng::Stream& rng)
{
    cfg.validate();
    const std::size_t n = cfg.n_steps();
    const int d = cfg.dim;
    std::vector<double> path((n + 1) * static_cast<std::size_t>(d), 0.0);
    if (!cfg.start.empty())
        for (int c = 0; c < d; ++c) path[c] = cfg.start[c];
    std::vector<double> inc(d);
    for (std::size_t i = 1; i <= n; ++i) {
        sample_stable_increment(cfg.alpha, cfg.dt, d, rng, inc.data());
        for (int c = 0; c < d; ++c) path[i * d + c] = path[(i - 1) * d + c] + inc[c];
    }
    return path;
}

// R^d-valued two-parameter Brownian sheet sampled at the grid s x t (strictly
// increasing positive coordinates). Each coordinate is an independent sheet
// assembled from independent rectangle increments of variance equal to the
// cell area, so the field vanishes on both axes and Var(field(s,t)) = s t.
// Layout: field[(i * t.size() + j) * d + c].
inline std::vector<double> brownian_sheet(const std::vector<double>& s, const std::vector<double>& t, int d,
                                          rng::Stream& rng)
{
    if (d < 1) throw std::invalid_argument("brownian_sheet: d must be >= 1");
    auto check_axis = [](const std::vector<double>& a) {
        if (a.empty()) throw std::invalid_argument("brownian_sheet: empty grid axis");
        double prev = 0.0;
        for (double v : a) {
            if (!(v >= prev)) throw std::invalid_argument("brownian_sheet: grid axis must be nondecreasing and >= 0");
            prev = v;
        }
    };
    check_axis(s);
    check_axis(t);
    const std::size_t ns = s.size(), nt = t.size();
    std::vector<double> field(ns * nt * static_cast<std::size_t>(d), 0.0);
    std::vector<double> prev_row(nt * static_cast<std::size_t>(d), 0.0); // field at previous s line
    std::vector<double> row(nt * static_cast<std::size_t>(d), 0.0);
    for (std::size_t i = 0; i < ns; ++i) {
        const double ds = s[i] - (i == 0 ? 0.0 : s[i - 1]);
        double acc_prev_t = 0.0;
        std::vector<double> run(d, 0.0); // cumulative rectangle increments along t on this s strip
        for (std::size_t j = 0; j < nt; ++j) {
            const double cell = ds * (t[j] - acc_prev_t);
            acc_prev_t = t[j];
            const double sd = std::sqrt(std::max(cell, 0.0));
            for (int c = 0; c < d; ++c) {
                run[c] += sd * rng.normal();
                row[j * d + c] = prev_row[j * d + c] + run[c];
                field[(i * nt + j) * d + c] = row[j * d + c];
            }
        }
        prev_row.swap(row);
    }
    return field;
}

// ---------------------------------------------------------------------------
// Characteristic-function validation

struct CharFnRow {
    double xi = 0.0;
    double target = 0.0;       // exp(-2^{-alpha/2} t |xi|^alpha), t = dt
    double empirical_re = 0.0; // mean cos <xi e1, X>
    double empirical_im = 0.0; // mean sin <xi e1, X>, ~0 by isotropy
    double std_error = 0.0;
};

inline std::vector<CharFnRow> char_function_table(double alpha, int d, double dt,
                                                  const std::vector<double>& xis, std::size_t n_samples,
                                                  std::uint64_t seed)
{
    std::vector<CharFnRow> rows;
    rows.reserve(xis.size());
    std::vector<double> first_coord(n_samples);
    rng::Stream rng(seed, 0x1eafu);
    std::vector<double> v(d);
    for (std::size_t i = 0; i < n_samples; ++i) {
        sample_stable_increment(alpha, dt, d, rng, v.data());
        first_coord[i] = v[0]; // xi along e1 w.l.o.g. by isotropy
    }
    for (double xi : xis) {
        CharFnRow row;
        row.xi = xi;
        row.target = std::exp(-std::pow(2.0, -0.5 * alpha) * dt * std::pow(std::fabs(xi), alpha));
        double sc = 0.0, ss = 0.0, sc2 = 0.0;
        for (double x : first_coord) {
            const double c = std::cos(xi * x);
            sc += c;
            ss += std::sin(xi * x);
            sc2 += c * c;
        }
        const double n = static_cast<double>(n_samples);
        row.empirical_re = sc / n;
        row.empirical_im = ss / n;
        const double var = std::max(0.0, sc2 / n - row.empirical_re * row.empirical_re);
        row.std_error = std::sqrt(var / n);
        rows.push_back(row);
    }
    return rows;
}

} // namespace fraclap::levy
