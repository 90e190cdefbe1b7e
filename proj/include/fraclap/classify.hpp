#pragma once

// Markov-uniqueness (MU) and essential-self-adjointness (ESA) verdicts for
// (alpha, d, Sigma) by three independent routes, plus their cross-check.
//
//   analytic     : capacity estimates under the dual energy definition.
//   geometric    : box-counting dimension against the thresholds d - alpha
//                  (MU) and d - 2 alpha (ESA), with finite-set shortcuts.
//   probabilistic: polarity of Sigma for the one-parameter stable process
//                  (MU) and for the two-parameter additive process (ESA).
//
// Kernel-order bookkeeping (the easiest place for an off-by-two defect, so
// it is centralized here): MU is governed by the (alpha/2, 2)-capacity,
// whose dual energy kernel is the Bessel kernel of order alpha; ESA by the
// (alpha, 2)-capacity with energy kernel of order 2 alpha. The equivalent
// Riesz orders are d - alpha and d - 2 alpha, valid while the respective
// order doubles stay below d. ESA implies MU; no emitted verdict may pair
// ESA = True with MU = False.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fraclap/additive.hpp"
#include "fraclap/capacity.hpp"
#include "fraclap/common.hpp"
#include "fraclap/kernels.hpp"
#include "fraclap/sets.hpp"

namespace fraclap::classify {

enum class Ternary { yes, no, indeterminate };

inline const char* to_string(Ternary t)
{
    switch (t) {
        case Ternary::yes: return "True";
        case Ternary::no: return "False";
        case Ternary::indeterminate: return "Indeterminate";
    }
    return "?";
}

inline bool confident(Ternary t) { return t != Ternary::indeterminate; }

enum class Route { analytic, geometric, probabilistic };

inline const char* to_string(Route r)
{
    switch (r) {
        case Route::analytic: return "Analytic";
        case Route::geometric: return "Geometric";
        case Route::probabilistic: return "Probabilistic";
    }
    return "?";
}

enum class Property { markov_uniqueness, essential_self_adjointness };

// ---------------------------------------------------------------------------
// Translation table: property -> capacity orders

struct CapacityQuestion {
    Property property;
    double capacity_order;  // the (order, 2)-capacity that characterizes the property
    double bessel_order;    // dual energy kernel gamma_{bessel_order}
    double riesz_order;     // equivalent Riesz capacity order
    bool riesz_equivalent_valid; // the Riesz equivalence requires 2 * capacity_order <= d
};

inline CapacityQuestion capacity_question(Property p, double alpha, int d)
{
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("capacity_question: alpha must be in (0,2]");
    if (d < 1) throw std::invalid_argument("capacity_question: d must be >= 1");
    CapacityQuestion q;
    q.property = p;
    q.capacity_order = (p == Property::markov_uniqueness) ? 0.5 * alpha : alpha;
    q.bessel_order = 2.0 * q.capacity_order;
    q.riesz_order = static_cast<double>(d) - q.bessel_order;
    q.riesz_equivalent_valid = (q.bessel_order <= static_cast<double>(d));
    return q;
}

// ---------------------------------------------------------------------------
// Verdicts

struct Verdict {
    Route route = Route::analytic;
    Ternary markov_unique = Ternary::indeterminate;
    Ternary essentially_self_adjoint = Ternary::indeterminate;
    double alpha = 2.0;
    int dim = 1;
    std::string set_description;
    std::string notes;
    bool esa_demoted = false; // ESA=True/MU=False would violate ESA => MU; demoted to Indeterminate

    // evidence (route-dependent)
    std::optional<capacity::CapacityEstimate> mu_capacity, esa_capacity;
    std::optional<sets::DimensionEstimate> dimension;
    std::optional<sets::DimensionThresholds> thresholds;
    double margin = 0.0;
    std::vector<additive::HittingEstimate> mu_hitting, esa_hitting; // one per start point
    std::vector<std::vector<double>> start_points;

    void reconcile()
    {
        if (essentially_self_adjoint == Ternary::yes && markov_unique == Ternary::no) {
            essentially_self_adjoint = Ternary::indeterminate;
            esa_demoted = true;
            notes += (notes.empty() ? "" : "; ");
            notes += "ESA evidence contradicted MU=False (ESA implies MU); ESA demoted to Indeterminate";
        }
    }
};

// ---------------------------------------------------------------------------
// Analytic route

struct AnalyticOptions {
    std::vector<int> levels{4, 5, 6, 7, 8, 9};
    capacity::CapacityOptions capacity;
};

inline Verdict classify_analytic(const sets::CompactSet& set, double alpha, int d,
                                 const AnalyticOptions& opts = {})
{
    if (set.dim() != d) throw std::invalid_argument("classify_analytic: dimension mismatch");
    Verdict v;
    v.route = Route::analytic;
    v.alpha = alpha;
    v.dim = d;
    v.set_description = set.describe();
    const auto q_mu = capacity_question(Property::markov_uniqueness, alpha, d);
    const auto q_esa = capacity_question(Property::essential_self_adjointness, alpha, d);
    v.mu_capacity = capacity::capacity_estimate(set, kernels::KernelSpec::bessel(q_mu.bessel_order, d),
                                                opts.levels, opts.capacity);
    v.esa_capacity = capacity::capacity_estimate(set, kernels::KernelSpec::bessel(q_esa.bessel_order, d),
                                                 opts.levels, opts.capacity);
    auto verdict_of = [](const capacity::CapacityEstimate& est) {
        switch (est.verdict) {
            case capacity::CapacityVerdict::zero: return Ternary::yes;
            case capacity::CapacityVerdict::positive: return Ternary::no;
            default: return Ternary::indeterminate;
        }
    };
    v.markov_unique = verdict_of(*v.mu_capacity);
    v.essentially_self_adjoint = verdict_of(*v.esa_capacity);
    v.reconcile();
    return v;
}

// ---------------------------------------------------------------------------
// Geometric route

struct GeometricOptions {
    double margin = 0.05;           // |D - threshold| <= margin -> Indeterminate
    std::vector<double> scales;     // box-counting scales; default 3^-2 .. 3^-7

    std::vector<double> effective_scales() const
    {
        if (!scales.empty()) return scales;
        std::vector<double> s;
        for (int k = 2; k <= 7; ++k) s.push_back(std::pow(3.0, -k));
        return s;
    }
};

inline Verdict classify_geometric(const sets::CompactSet& set, double alpha, int d,
                                  const GeometricOptions& opts = {})
{
    if (set.dim() != d) throw std::invalid_argument("classify_geometric: dimension mismatch");
    Verdict v;
    v.route = Route::geometric;
    v.alpha = alpha;
    v.dim = d;
    v.set_description = set.describe();
    v.margin = opts.margin;
    v.thresholds = sets::dimension_thresholds(alpha, d);

    if (set.is_empty()) {
        v.markov_unique = Ternary::yes;
        v.essentially_self_adjoint = Ternary::yes;
        v.notes = "empty set: Hausdorff measure zero at every order";
        return v;
    }

    auto against_threshold = [&](double estimate, double threshold) {
        if (estimate < threshold - opts.margin) return Ternary::yes;
        if (estimate > threshold + opts.margin) return Ternary::no;
        return Ternary::indeterminate;
    };

    if (set.is_finite()) {
        // H^0 is the counting measure: finite sets satisfy the finite-measure
        // hypothesis at every order >= 0.
        v.notes = "finite set: counting-measure shortcut";
        v.markov_unique =
            (v.thresholds->mu_threshold >= 0.0) ? Ternary::yes : against_threshold(0.0, v.thresholds->mu_threshold);
        v.essentially_self_adjoint = (v.thresholds->esa_threshold >= 0.0)
                                         ? Ternary::yes
                                         : against_threshold(0.0, v.thresholds->esa_threshold);
        v.reconcile();
        return v;
    }

    const auto analytic_dim = set.analytic_dimension();
    if (!analytic_dim) {
        v.notes = "refused: box and Hausdorff dimensions are not known to coincide for this set";
        return v;
    }
    const auto scales = opts.effective_scales();
    v.dimension = sets::box_dimension(set, scales);
    const double estimate = v.dimension->value;
    v.markov_unique = against_threshold(estimate, v.thresholds->mu_threshold);
    v.essentially_self_adjoint = against_threshold(estimate, v.thresholds->esa_threshold);
    v.reconcile();
    return v;
}

// ---------------------------------------------------------------------------
// Probabilistic route

struct ProbabilisticOptions {
    std::vector<double> eps_levels{0.4, 0.2, 0.1, 0.05};
    std::size_t trials = 100000;
    double horizon = 1.0;
    double step_refinement = 1.0;
    additive::HittingThresholds thresholds;
    int n_starts = 2;
    double start_radius = 1.0;
    std::uint64_t seed = 20200523;
};

namespace detail {

inline std::vector<std::vector<double>> make_start_points(const sets::CompactSet& set, int d,
                                                          const ProbabilisticOptions& opts)
{
    sets::Point lo, hi;
    set.bounding_box(lo, hi);
    std::vector<double> center(d, 0.0);
    for (int c = 0; c < d; ++c) center[c] = 0.5 * (lo[c] + hi[c]);
    std::vector<std::vector<double>> starts;
    const double eps_max = opts.eps_levels.front();
    for (int k = 0; k < opts.n_starts; ++k) {
        std::vector<double> dir(d, 0.0);
        dir[k % d] = (k % 2 == 0) ? 1.0 : -1.0;
        double radius = opts.start_radius;
        for (int tries = 0; tries < 40; ++tries) {
            std::vector<double> x(d);
            for (int c = 0; c < d; ++c) x[c] = center[c] + radius * dir[c];
            if (set.distance(x.data()) > 1.5 * eps_max) {
                starts.push_back(std::move(x));
                break;
            }
            radius *= 1.5;
        }
    }
    if (starts.empty()) throw std::invalid_argument("make_start_points: no admissible start point found");
    return starts;
}

} // namespace detail

inline Verdict classify_probabilistic(const sets::CompactSet& set, double alpha, int d,
                                      const ProbabilisticOptions& opts = {})
{
    if (set.dim() != d) throw std::invalid_argument("classify_probabilistic: dimension mismatch");
    Verdict v;
    v.route = Route::probabilistic;
    v.alpha = alpha;
    v.dim = d;
    v.set_description = set.describe();

    // The Kakutani-type dichotomies assume d >= alpha (MU) and d >= 2 alpha
    // (ESA). Outside those ranges only the unconditional direction is kept:
    // hitting with positive probability forces positive capacity, so
    // NonPolar still refutes the property; a Polar outcome defers to the
    // analytic route.
    const bool mu_in_scope = static_cast<double>(d) >= alpha;
    const bool esa_in_scope = static_cast<double>(d) >= 2.0 * alpha;
    if (!mu_in_scope)
        v.notes = "MU route out of hypothesis (d < alpha): only NonPolar evidence accepted";
    if (!esa_in_scope) {
        v.notes += (v.notes.empty() ? "" : "; ");
        v.notes += "ESA route out of hypothesis (d < 2 alpha): only NonPolar evidence accepted";
    }
    if (set.is_empty()) {
        v.markov_unique = mu_in_scope ? Ternary::yes : Ternary::indeterminate;
        v.essentially_self_adjoint = esa_in_scope ? Ternary::yes : Ternary::indeterminate;
        v.notes += (v.notes.empty() ? "" : "; ");
        v.notes += "empty set is trivially polar";
        return v;
    }

    v.start_points = detail::make_start_points(set, d, opts);

    auto combine = [](const std::vector<additive::HittingEstimate>& per_start, bool in_scope) {
        bool any_nonpolar = false, all_polar = !per_start.empty();
        for (const auto& est : per_start) {
            any_nonpolar = any_nonpolar || (est.verdict == additive::Polarity::non_polar);
            all_polar = all_polar && (est.verdict == additive::Polarity::polar);
        }
        if (any_nonpolar) return Ternary::no; // hit with positive probability from some x
        if (all_polar && in_scope) return Ternary::yes;
        return Ternary::indeterminate;
    };

    auto run_route = [&](additive::ProcessKind kind, std::vector<additive::HittingEstimate>& out) {
        std::uint64_t salt = (kind == additive::ProcessKind::one_param_stable) ? 0x0a01u : 0x0a02u;
        for (std::size_t si = 0; si < v.start_points.size(); ++si) {
            additive::HittingConfig cfg;
            cfg.kind = kind;
            cfg.alpha = alpha;
            cfg.dim = d;
            cfg.start = v.start_points[si];
            cfg.horizon = opts.horizon;
            cfg.eps_levels = opts.eps_levels;
            cfg.trials = opts.trials;
            cfg.step_refinement = opts.step_refinement;
            cfg.thresholds = opts.thresholds;
            out.push_back(additive::hitting_estimate(cfg, set, opts.seed ^ (salt + 0x100 * si)));
        }
    };

    run_route(additive::ProcessKind::one_param_stable, v.mu_hitting);
    v.markov_unique = combine(v.mu_hitting, mu_in_scope);
    run_route(additive::ProcessKind::additive_stable, v.esa_hitting);
    v.essentially_self_adjoint = combine(v.esa_hitting, esa_in_scope);
    v.reconcile();
    return v;
}

// ---------------------------------------------------------------------------
// Cross-check of all applicable routes

struct CrossCheckOptions {
    AnalyticOptions analytic;
    GeometricOptions geometric;
    ProbabilisticOptions probabilistic;
    bool run_probabilistic = true;
};

struct CrossCheckReport {
    std::vector<Verdict> verdicts;
    std::vector<std::string> contradictions; // confident pairwise mismatches, with evidence digests
    bool falsification = false;
    Ternary headline_mu = Ternary::indeterminate;
    Ternary headline_esa = Ternary::indeterminate;
    Route headline_mu_route = Route::analytic;
    Route headline_esa_route = Route::analytic;
};

inline CrossCheckReport cross_check(const sets::CompactSet& set, double alpha, int d,
                                    const CrossCheckOptions& opts = {})
{
    CrossCheckReport rep;
    rep.verdicts.push_back(classify_analytic(set, alpha, d, opts.analytic));
    rep.verdicts.push_back(classify_geometric(set, alpha, d, opts.geometric));
    if (opts.run_probabilistic) rep.verdicts.push_back(classify_probabilistic(set, alpha, d, opts.probabilistic));

    auto check_pair = [&](const Verdict& a, const Verdict& b, Ternary Verdict::* prop, const char* name) {
        const Ternary va = a.*prop;
        const Ternary vb = b.*prop;
        if (confident(va) && confident(vb) && va != vb) {
            rep.contradictions.push_back(std::string(name) + ": " + to_string(a.route) + "=" + to_string(va) +
                                         " vs " + to_string(b.route) + "=" + to_string(vb));
            rep.falsification = true;
        }
    };
    for (std::size_t i = 0; i < rep.verdicts.size(); ++i)
        for (std::size_t j = i + 1; j < rep.verdicts.size(); ++j) {
            check_pair(rep.verdicts[i], rep.verdicts[j], &Verdict::markov_unique, "markov_unique");
            check_pair(rep.verdicts[i], rep.verdicts[j], &Verdict::essentially_self_adjoint,
                       "essentially_self_adjoint");
        }

    // headline: route priority analytic > geometric > probabilistic among confident verdicts
    for (const auto& v : rep.verdicts) {
        if (rep.headline_mu == Ternary::indeterminate && confident(v.markov_unique)) {
            rep.headline_mu = v.markov_unique;
            rep.headline_mu_route = v.route;
        }
        if (rep.headline_esa == Ternary::indeterminate && confident(v.essentially_self_adjoint)) {
            rep.headline_esa = v.essentially_self_adjoint;
            rep.headline_esa_route = v.route;
        }
    }
    return rep;
}

} // namespace fraclap::classify
