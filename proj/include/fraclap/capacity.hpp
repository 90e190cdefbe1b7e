#pragma once

// Discrete kernel energies, equilibrium measures on the probability simplex,
// and capacity estimation by refinement scaling.
//
// The capacity of a compact set K under a radial kernel k is estimated
// through its dual form: sup over probability measures on K of 1/energy.
// Discretizations at increasing levels produce minimal energies E_n; the set
// has zero capacity when E_n diverges (fitted growth against log n above a
// threshold) and positive capacity when E_n stabilizes, in which case the
// capacity is 1/E_extrapolated.
//
// Finite sets are treated atomically (diagonal terms w_i^2 k(0) included),
// which reproduces the Dirac-measure computations exactly: a kernel
// unbounded at the origin forces infinite energy and hence zero capacity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fraclap/common.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/sets.hpp"
#include "fraclap/stats.hpp"

namespace fraclap::capacity {

using kernels::KernelSpec;
using kernels::RadialKernel;

struct DiscreteMeasure {
    std::vector<double> coords; // flat n x dim
    int dim = 1;
    std::vector<double> weights;

    static DiscreteMeasure from_points(const std::vector<sets::Point>& pts, std::vector<double> w)
    {
        if (pts.empty()) throw std::invalid_argument("DiscreteMeasure: need at least one point");
        if (pts.size() != w.size()) throw std::invalid_argument("DiscreteMeasure: points/weights length mismatch");
        DiscreteMeasure m;
        m.dim = static_cast<int>(pts.front().size());
        for (const auto& p : pts) {
            if (static_cast<int>(p.size()) != m.dim) throw std::invalid_argument("DiscreteMeasure: mixed dimensions");
            m.coords.insert(m.coords.end(), p.begin(), p.end());
        }
        m.weights = std::move(w);
        m.validate();
        return m;
    }

    static DiscreteMeasure uniform_on(const sets::Discretization& net)
    {
        DiscreteMeasure m;
        m.dim = net.dim;
        m.coords = net.coords;
        m.weights.assign(net.size(), net.size() ? 1.0 / static_cast<double>(net.size()) : 0.0);
        return m;
    }

    std::size_t size() const { return weights.size(); }
    const double* point(std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(dim); }

    double total_mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

    void validate() const
    {
        if (coords.size() != weights.size() * static_cast<std::size_t>(dim))
            throw std::invalid_argument("DiscreteMeasure: coords/weights length mismatch");
        for (double w : weights)
            if (!(w >= 0.0)) throw std::invalid_argument("DiscreteMeasure: negative weight");
        if (!(total_mass() > 0.0)) throw std::invalid_argument("DiscreteMeasure: total mass must be > 0");
    }
};

enum class DiagonalRule { atomic, off_diagonal };

inline const char* to_string(DiagonalRule r) { return r == DiagonalRule::atomic ? "atomic" : "off_diagonal"; }

struct EnergyReport {
    double value = 0.0; // may be +inf
    KernelSpec kernel;
    DiagonalRule rule = DiagonalRule::off_diagonal;
    std::size_t n_points = 0;
};

// Double sum over pairs; the atomic rule adds diagonal terms w_i^2 k(0).
// Coincident distinct points under an unbounded kernel yield +inf (reported,
// not an error).
inline EnergyReport energy(const DiscreteMeasure& mu, const RadialKernel& kernel, DiagonalRule rule)
{
    mu.validate();
    if (kernel.spec().dim != mu.dim)
        throw std::invalid_argument("energy: kernel and measure ambient dimensions differ");
    EnergyReport rep;
    rep.kernel = kernel.spec();
    rep.rule = rule;
    rep.n_points = mu.size();
    const std::size_t n = mu.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n && !std::isinf(total); ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = sets::detail::dist_point(mu.point(i), mu.point(j), mu.dim);
            const double k = (r > 0.0) ? kernel(r) : kernel.at_zero();
            total += 2.0 * mu.weights[i] * mu.weights[j] * k;
            if (std::isinf(total)) break;
        }
    }
    if (rule == DiagonalRule::atomic && !std::isinf(total)) {
        const double k0 = kernel.at_zero();
        for (std::size_t i = 0; i < n; ++i) {
            if (mu.weights[i] > 0.0) total += mu.weights[i] * mu.weights[i] * k0;
            if (std::isinf(total)) break;
        }
    }
    rep.value = total;
    return rep;
}

// ---------------------------------------------------------------------------
// Equilibrium measure: minimize w^T K w over the probability simplex.

struct EquilibriumOptions {
    double kkt_tol = 1e-6;
    std::size_t max_iterations = 100000;
    std::vector<double> warm_start; // optional initial weights (projected onto the simplex)
};

struct EquilibriumResult {
    std::vector<double> weights;
    double energy = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

namespace detail {

// Euclidean projection onto the probability simplex (Duchi et al. 2008).
inline void project_simplex(std::vector<double>& v)
{
    const std::size_t n = v.size();
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < n; ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = i + 1;
            tau = t;
        }
    }
    (void)rho;
    for (auto& x : v) x = std::max(0.0, x - tau);
}

inline void matvec(const std::vector<double>& K, std::size_t n, const std::vector<double>& x,
                   std::vector<double>& out)
{
    out.resize(n);
    parallel_blocks(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* row = K.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
            out[i] = s;
        }
    });
}

// Projected gradient with simplex projection, Barzilai-Borwein step sizes
// and an exact quadratic line search along each feasible direction. Descent
// from the uniform start guarantees energy <= energy(uniform).
inline EquilibriumResult simplex_qp_minimize(const std::vector<double>& K, std::size_t n,
                                             const EquilibriumOptions& opts)
{
    EquilibriumResult res;
    if (opts.warm_start.size() == n) {
        res.weights = opts.warm_start;
        project_simplex(res.weights);
    } else {
        res.weights.assign(n, 1.0 / static_cast<double>(n));
    }
    if (n == 1) {
        res.weights.assign(1, 1.0);
        res.energy = K[0];
        res.converged = true;
        return res;
    }
    std::vector<double> g, Kp, u, p(n);
    matvec(K, n, res.weights, g);
    for (auto& x : g) x *= 2.0;
    double max_row = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::fabs(K[i * n + j]);
        max_row = std::max(max_row, s);
    }
    double eta = (max_row > 0.0) ? 0.5 / max_row : 1.0;
    const double support_tol = 1e-12;
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        res.iterations = it;
        const double lambda = std::inner_product(g.begin(), g.end(), res.weights.begin(), 0.0);
        double viol = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            viol = std::max(viol, lambda - g[i]);
            if (res.weights[i] > support_tol) viol = std::max(viol, std::fabs(g[i] - lambda));
        }
        res.kkt_residual = viol / (1.0 + std::fabs(lambda));
        if (res.kkt_residual <= opts.kkt_tol) {
            res.converged = true;
            break;
        }
        u = res.weights;
        for (std::size_t i = 0; i < n; ++i) u[i] -= eta * g[i];
        project_simplex(u);
        double norm_p = 0.0, gp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = u[i] - res.weights[i];
            norm_p = std::max(norm_p, std::fabs(p[i]));
            gp += g[i] * p[i];
        }
        if (norm_p < 1e-16 || gp >= 0.0) {
            eta *= 4.0; // projection step too small to make progress
            if (eta > 1e14) break;
            continue;
        }
        matvec(K, n, p, Kp);
        const double pKp = std::inner_product(p.begin(), p.end(), Kp.begin(), 0.0);
        double t = 1.0;
        if (pKp > 0.0) t = std::min(1.0, -gp / (2.0 * pKp));
        for (std::size_t i = 0; i < n; ++i) {
            res.weights[i] = std::max(0.0, res.weights[i] + t * p[i]);
            g[i] += 2.0 * t * Kp[i];
        }
        if (pKp > 0.0) {
            double pp = 0.0;
            for (std::size_t i = 0; i < n; ++i) pp += p[i] * p[i];
            eta = std::clamp(pp / (2.0 * pKp), 1e-14, 1e14);
        } else {
            eta *= 2.0;
        }
    }
    // final exact energy
    std::vector<double> Kw;
    matvec(K, n, res.weights, Kw);
    res.energy = std::inner_product(res.weights.begin(), res.weights.end(), Kw.begin(), 0.0);
    return res;
}

// Assemble the kernel matrix. When `self_energy` is set, the diagonal holds
// the local self-interaction k(s_i/2) with s_i the nearest-neighbor spacing;
// otherwise the provided constant is used (k(0) for the atomic rule).
inline std::vector<double> assemble_matrix(const double* coords, std::size_t n, int dim,
                                           const RadialKernel& kernel, bool self_energy, double diagonal)
{
    std::vector<double> K(n * n);
    parallel_blocks(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double nearest = math::inf();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double r = sets::detail::dist_point(coords + i * dim, coords + j * dim, dim);
                nearest = std::min(nearest, r);
                K[i * n + j] = (r > 0.0) ? kernel(r) : kernel.at_zero();
            }
            if (self_energy)
                K[i * n + i] = (n > 1 && nearest > 0.0) ? kernel(0.5 * nearest) : 0.0;
            else
                K[i * n + i] = diagonal;
        }
    });
    return K;
}

} // namespace detail

// Equilibrium weights and minimal off-diagonal energy for a point cloud.
//
// The raw off-diagonal quadratic form has a degenerate global minimum of
// zero (all mass on a single point), so the solver minimizes the standard
// self-energy-regularized form instead: diagonal entries k(s_i/2) at the
// local spacing s_i penalize concentration, and the minimizer equalizes
// potentials across the support. The reported energy is the off-diagonal
// form evaluated at those weights; the self-interaction term it drops is a
// discretization artifact of order k(h)/n that vanishes under refinement.
inline EquilibriumResult equilibrium(const double* coords, std::size_t n, int dim, const RadialKernel& kernel,
                                     const EquilibriumOptions& opts = {})
{
    if (n == 0) throw std::invalid_argument("equilibrium: need at least one point");
    std::vector<double> K = detail::assemble_matrix(coords, n, dim, kernel, true, 0.0);
    for (double v : K)
        if (std::isinf(v)) {
            // coincident distinct points with an unbounded kernel
            EquilibriumResult res;
            res.weights.assign(n, 1.0 / static_cast<double>(n));
            res.energy = math::inf();
            return res;
        }
    EquilibriumResult res = detail::simplex_qp_minimize(K, n, opts);
    auto off_diag_energy = [&](const std::vector<double>& w) {
        double diag = 0.0, full = 0.0;
        std::vector<double> Kw;
        detail::matvec(K, n, w, Kw);
        full = std::inner_product(w.begin(), w.end(), Kw.begin(), 0.0);
        for (std::size_t i = 0; i < n; ++i) diag += w[i] * w[i] * K[i * n + i];
        return full - diag;
    };
    res.energy = off_diag_energy(res.weights);
    if (n > 1) {
        const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
        const double e_uniform = off_diag_energy(uniform);
        if (res.energy > e_uniform) { // keep the contract: never worse than uniform
            res.weights = uniform;
            res.energy = e_uniform;
        }
    }
    return res;
}

inline EquilibriumResult equilibrium(const sets::Discretization& net, const RadialKernel& kernel,
                                     const EquilibriumOptions& opts = {})
{
    return equilibrium(net.coords.data(), net.size(), net.dim, kernel, opts);
}

// ---------------------------------------------------------------------------
// Capacity estimation by refinement scaling

enum class CapacityVerdict { zero, positive, indeterminate };

inline const char* to_string(CapacityVerdict v)
{
    switch (v) {
        case CapacityVerdict::zero: return "Zero";
        case CapacityVerdict::positive: return "Positive";
        case CapacityVerdict::indeterminate: return "Indeterminate";
    }
    return "?";
}

struct CapacityThresholds {
    double zero_slope = 0.1;    // min growth of energy per log n to call Zero
    double zero_r2 = 0.9;       // regression quality gate for Zero
    double stabilize_rel = 0.02; // max relative change of the last two levels for Positive
};

struct LevelResult {
    int level = 0;
    std::size_t n_points = 0;
    double min_energy = 0.0;
    double kkt_residual = 0.0;
    bool converged = true;
};

struct CapacityEstimate {
    KernelSpec kernel;
    DiagonalRule rule = DiagonalRule::off_diagonal;
    std::vector<LevelResult> levels;
    double growth_slope = 0.0;
    double growth_r2 = 0.0;
    double last_rel_change = 0.0;
    CapacityVerdict verdict = CapacityVerdict::indeterminate;
    double capacity_value = 0.0; // meaningful only when verdict == positive
    CapacityThresholds thresholds;
    std::string notes;
};

struct CapacityOptions {
    CapacityThresholds thresholds;
    EquilibriumOptions solver;
    std::size_t max_points = 4096;
};

inline CapacityEstimate capacity_estimate(const sets::CompactSet& set, const KernelSpec& spec,
                                          std::span<const int> levels, const CapacityOptions& opts = {})
{
    if (spec.dim != set.dim()) throw std::invalid_argument("capacity_estimate: kernel/set dimension mismatch");
    CapacityEstimate est;
    est.kernel = spec;
    est.thresholds = opts.thresholds;

    if (set.is_empty()) {
        est.verdict = CapacityVerdict::zero;
        est.rule = DiagonalRule::atomic;
        est.notes = "empty set: no nonzero Radon measure exists";
        return est;
    }

    // Finite sets: atomic rule, exact Dirac-type computation.
    if (set.is_finite()) {
        est.rule = DiagonalRule::atomic;
        const sets::Discretization net = set.discretize(0);
        const RadialKernel kernel(spec);
        const double k0 = kernel.at_zero();
        LevelResult lr;
        lr.n_points = net.size();
        if (std::isinf(k0)) {
            lr.min_energy = math::inf();
            est.notes = "kernel unbounded at 0: every measure with atoms has infinite energy";
            est.verdict = CapacityVerdict::zero;
        } else {
            std::vector<double> K =
                detail::assemble_matrix(net.coords.data(), net.size(), net.dim, kernel, false, k0);
            const EquilibriumResult eq = detail::simplex_qp_minimize(K, net.size(), opts.solver);
            lr.min_energy = eq.energy;
            lr.kkt_residual = eq.kkt_residual;
            lr.converged = eq.converged;
            est.verdict = CapacityVerdict::positive;
            est.capacity_value = (eq.energy > 0.0) ? 1.0 / eq.energy : math::inf();
            est.notes = "finite set, bounded kernel: atomic equilibrium energy is exact";
        }
        for (std::size_t i = 0; i < std::max<std::size_t>(levels.size(), 1); ++i) {
            lr.level = levels.empty() ? 0 : levels[i];
            est.levels.push_back(lr);
        }
        return est;
    }

    if (levels.size() < 3) {
        est.verdict = CapacityVerdict::indeterminate;
        est.notes = "fewer than 3 usable levels";
        return est;
    }

    // Continuum sets: off-diagonal energies on refining nets.
    est.rule = DiagonalRule::off_diagonal;
    std::vector<sets::Discretization> nets;
    for (int level : levels) {
        sets::Discretization net = set.discretize(level);
        if (net.size() > opts.max_points)
            throw std::invalid_argument("capacity_estimate: level " + std::to_string(level) + " exceeds max_points");
        nets.push_back(std::move(net));
    }
    // Memoized kernel over the full pair-distance range of the finest net.
    double rmin = math::inf();
    for (const auto& net : nets)
        if (net.resolution > 0.0) rmin = std::min(rmin, 0.2 * net.resolution);
    const double rmax = 1.05 * set.diameter_bound() + 1e-9;
    if (!(rmin < rmax)) rmin = 1e-9 * rmax;
    const RadialKernel kernel =
        (spec.kind == kernels::KernelKind::riesz) ? RadialKernel(spec) : RadialKernel(spec, rmin, rmax);

    std::vector<double> log_n, energies;
    std::vector<double> prev_weights;
    const sets::Discretization* prev_net = nullptr;
    for (std::size_t li = 0; li < nets.size(); ++li) {
        EquilibriumOptions solver = opts.solver;
        if (prev_net && !prev_weights.empty() && nets[li].size() >= prev_net->size()) {
            // warm start: piecewise-constant interpolation of the coarse weights
            const std::size_t nf = nets[li].size();
            const std::size_t nc = prev_net->size();
            std::vector<double> w(nf, 0.0);
            parallel_for(nf, [&](std::size_t fi) {
                const double* fp = nets[li].point(fi);
                std::size_t best = 0;
                double best_d = math::inf();
                for (std::size_t ci = 0; ci < nc; ++ci) {
                    const double d = sets::detail::dist_point(fp, prev_net->point(ci), nets[li].dim);
                    if (d < best_d) {
                        best_d = d;
                        best = ci;
                    }
                }
                w[fi] = prev_weights[best];
            });
            double mass = std::accumulate(w.begin(), w.end(), 0.0);
            if (mass > 0.0) {
                for (auto& x : w) x /= mass;
                solver.warm_start = std::move(w);
            }
        }
        const EquilibriumResult eq = equilibrium(nets[li], kernel, solver);
        prev_weights = eq.weights;
        prev_net = &nets[li];
        LevelResult lr;
        lr.level = levels[li];
        lr.n_points = nets[li].size();
        lr.min_energy = eq.energy;
        lr.kkt_residual = eq.kkt_residual;
        lr.converged = eq.converged;
        est.levels.push_back(lr);
        log_n.push_back(std::log(static_cast<double>(nets[li].size())));
        energies.push_back(eq.energy);
    }

    for (double e : energies)
        if (std::isinf(e)) {
            est.verdict = CapacityVerdict::zero;
            est.notes = "infinite discrete energy";
            return est;
        }

    bool distinct_n = false;
    for (std::size_t i = 1; i < log_n.size(); ++i)
        if (log_n[i] != log_n[0]) distinct_n = true;
    if (distinct_n) {
        const auto fit = stats::least_squares(log_n, energies);
        est.growth_slope = fit.slope;
        est.growth_r2 = fit.r2;
    }
    const double e_last = energies.back();
    const double e_prev = energies[energies.size() - 2];
    est.last_rel_change = std::fabs(e_last - e_prev) / std::max(std::fabs(e_last), 1e-300);

    // Mean contraction ratio of the level increments over the tail. A ratio
    // well below 1 certifies a convergent (geometric) energy sequence even
    // when the last levels have not yet stabilized; ratios near 1 are the
    // ambiguous logarithmic regime.
    double increment_ratio = math::inf();
    {
        std::vector<double> incr, ratios;
        for (std::size_t i = 1; i < energies.size(); ++i) incr.push_back(energies[i] - energies[i - 1]);
        for (std::size_t i = 1; i < incr.size(); ++i)
            if (incr[i - 1] > 0.0 && incr[i] > 0.0) ratios.push_back(incr[i] / incr[i - 1]);
        if (ratios.size() > 4) ratios.erase(ratios.begin(), ratios.end() - 4);
        if (ratios.size() >= 2) {
            double s = 0.0;
            for (double x : ratios) s += x;
            increment_ratio = s / static_cast<double>(ratios.size());
        }
    }

    const double contracting = 0.95, ambiguous_hi = 1.02;
    if (est.last_rel_change < opts.thresholds.stabilize_rel) {
        est.verdict = CapacityVerdict::positive;
        const double e_lim = stats::aitken_limit(energies);
        const double e_use = (e_lim > 0.0 && std::isfinite(e_lim)) ? e_lim : e_last;
        est.capacity_value = (e_use > 0.0) ? 1.0 / e_use : math::inf();
    } else if (std::isfinite(increment_ratio) && increment_ratio < contracting) {
        // geometric tail: extrapolate the limit energy
        est.verdict = CapacityVerdict::positive;
        const double d_last = energies.back() - energies[energies.size() - 2];
        const double e_lim = e_last + d_last * increment_ratio / (1.0 - increment_ratio);
        est.capacity_value = (e_lim > 0.0) ? 1.0 / e_lim : math::inf();
        est.notes = "energy increments contract geometrically (ratio " + std::to_string(increment_ratio) + ")";
    } else if (std::isfinite(increment_ratio) && increment_ratio > ambiguous_hi) {
        // growing increments cannot stabilize: super-logarithmic divergence
        est.verdict = CapacityVerdict::zero;
        est.notes = "energy increments grow (ratio " + std::to_string(increment_ratio) + ")";
    } else if (std::isfinite(increment_ratio)) {
        est.verdict = CapacityVerdict::indeterminate;
        est.notes = "near-logarithmic energy growth (increment ratio " + std::to_string(increment_ratio) + ")";
    } else if (distinct_n && est.growth_slope > opts.thresholds.zero_slope &&
               est.growth_r2 > opts.thresholds.zero_r2) {
        est.verdict = CapacityVerdict::zero;
    } else {
        est.verdict = CapacityVerdict::indeterminate;
        est.notes = "energy sequence neither clearly divergent nor stabilized";
    }
    return est;
}

// ---------------------------------------------------------------------------
// Bessel-vs-Riesz capacity consistency (valid for 2 alpha <= d)

enum class ConsistencyOutcome { agree, disagree, indeterminate };

inline const char* to_string(ConsistencyOutcome o)
{
    switch (o) {
        case ConsistencyOutcome::agree: return "agree";
        case ConsistencyOutcome::disagree: return "disagree";
        case ConsistencyOutcome::indeterminate: return "indeterminate";
    }
    return "?";
}

struct ConsistencyReport {
    CapacityEstimate bessel_side;
    CapacityEstimate riesz_side;
    ConsistencyOutcome outcome = ConsistencyOutcome::indeterminate;
    bool toolkit_defect = false; // both sides confident and contradicting
};

inline ConsistencyReport bessel_riesz_consistency(const sets::CompactSet& set, double alpha, int d,
                                                  std::span<const int> levels, const CapacityOptions& opts = {})
{
    if (!(alpha > 0.0 && 2.0 * alpha <= static_cast<double>(d)))
        throw std::invalid_argument("bessel_riesz_consistency: requires 0 < 2 alpha <= d");
    ConsistencyReport rep;
    rep.bessel_side = capacity_estimate(set, KernelSpec::bessel(2.0 * alpha, d), levels, opts);
    rep.riesz_side = capacity_estimate(set, KernelSpec::riesz(static_cast<double>(d) - 2.0 * alpha, d), levels, opts);
    const auto vb = rep.bessel_side.verdict;
    const auto vr = rep.riesz_side.verdict;
    if (vb == CapacityVerdict::indeterminate || vr == CapacityVerdict::indeterminate) {
        rep.outcome = ConsistencyOutcome::indeterminate;
    } else if (vb == vr) {
        rep.outcome = ConsistencyOutcome::agree;
    } else {
        rep.outcome = ConsistencyOutcome::disagree;
        rep.toolkit_defect = true;
    }
    return rep;
}

} // namespace fraclap::capacity
