#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraclap/classify.hpp"

using namespace fraclap;
using namespace fraclap::classify;
using namespace fraclap::sets;
using Catch::Approx;

TEST_CASE("capacity question translation table", "[classify]")
{
    // MU at (alpha, d): capacity order alpha/2, energy kernel gamma_alpha,
    // riesz order d - alpha
    const auto mu = capacity_question(Property::markov_uniqueness, 2.0, 5);
    CHECK(mu.capacity_order == Approx(1.0));
    CHECK(mu.bessel_order == Approx(2.0));
    CHECK(mu.riesz_order == Approx(3.0));
    CHECK(mu.riesz_equivalent_valid);

    const auto esa = capacity_question(Property::essential_self_adjointness, 2.0, 5);
    CHECK(esa.capacity_order == Approx(2.0));
    CHECK(esa.bessel_order == Approx(4.0));
    CHECK(esa.riesz_order == Approx(1.0));
    CHECK(esa.riesz_equivalent_valid);

    const auto esa13 = capacity_question(Property::essential_self_adjointness, 1.5, 2);
    CHECK(esa13.bessel_order == Approx(3.0));
    CHECK_FALSE(esa13.riesz_equivalent_valid); // 2 alpha = 3 > d = 2

    const auto mu051 = capacity_question(Property::markov_uniqueness, 0.5, 1);
    CHECK(mu051.bessel_order == Approx(0.5));
    CHECK(mu051.riesz_order == Approx(0.5));
}

TEST_CASE("analytic route on guiding examples", "[classify]")
{
    // (alpha=2, d=3, point): MU True, ESA False
    {
        const auto v = classify_analytic(CompactSet::origin(3), 2.0, 3);
        CHECK(v.markov_unique == Ternary::yes);
        CHECK(v.essentially_self_adjoint == Ternary::no);
    }
    // (alpha=0.5, d=1, point): ESA True (d >= 2 alpha)
    {
        const auto v = classify_analytic(CompactSet::origin(1), 0.5, 1);
        CHECK(v.essentially_self_adjoint == Ternary::yes);
    }
    // empty set: both True
    {
        const auto v = classify_analytic(CompactSet::empty(2), 1.3, 2);
        CHECK(v.markov_unique == Ternary::yes);
        CHECK(v.essentially_self_adjoint == Ternary::yes);
    }
}

TEST_CASE("finite-set battery: MU iff d >= alpha, ESA iff d >= 2 alpha", "[classify]")
{
    for (double alpha : {0.5, 1.0, 1.5, 2.0})
        for (int d = 1; d <= 5; ++d) {
            const auto pt = CompactSet::origin(d);
            const auto va = classify_analytic(pt, alpha, d);
            const auto vg = classify_geometric(pt, alpha, d);
            const bool mu_boundary = (static_cast<double>(d) == alpha);
            const bool esa_boundary = (static_cast<double>(d) == 2.0 * alpha);
            const auto mu_want = (static_cast<double>(d) >= alpha) ? Ternary::yes : Ternary::no;
            const auto esa_want = (static_cast<double>(d) >= 2.0 * alpha) ? Ternary::yes : Ternary::no;
            INFO("alpha=" << alpha << " d=" << d);
            if (!mu_boundary) {
                CHECK(va.markov_unique == mu_want);
                CHECK(vg.markov_unique == mu_want);
            } else {
                CHECK(va.markov_unique != (mu_want == Ternary::yes ? Ternary::no : Ternary::yes));
                CHECK(vg.markov_unique != (mu_want == Ternary::yes ? Ternary::no : Ternary::yes));
            }
            if (!esa_boundary) {
                CHECK(va.essentially_self_adjoint == esa_want);
                CHECK(vg.essentially_self_adjoint == esa_want);
            } else {
                CHECK(va.essentially_self_adjoint != (esa_want == Ternary::yes ? Ternary::no : Ternary::yes));
                CHECK(vg.essentially_self_adjoint != (esa_want == Ternary::yes ? Ternary::no : Ternary::yes));
            }
        }
}

TEST_CASE("geometric route on the Cantor set", "[classify]")
{
    const auto cantor = CompactSet::middle_thirds_cantor();
    // alpha = 0.15: threshold 0.7 above dim 0.6309 -> ESA True
    CHECK(classify_geometric(cantor, 0.15, 1).essentially_self_adjoint == Ternary::yes);
    // alpha = 0.25: threshold 0.5 below dim -> ESA False
    CHECK(classify_geometric(cantor, 0.25, 1).essentially_self_adjoint == Ternary::no);
    // near the margin band: Indeterminate
    const auto near = classify_geometric(cantor, 0.20, 1);
    CHECK(near.essentially_self_adjoint == Ternary::indeterminate);
    // finite set in d=2 with alpha=1 (2 alpha = d): counting measure shortcut
    const auto pts = CompactSet::finite_points({{0.0, 0.0}, {1.0, 0.5}, {0.3, 0.9}}, 2);
    CHECK(classify_geometric(pts, 1.0, 2).essentially_self_adjoint == Ternary::yes);
}

TEST_CASE("geometric route refuses dimension-incompatible products", "[classify]")
{
    const auto twisted = CompactSet::product(CompactSet::cantor_dust(1, 1.0 / 3.0, 2),
                                             CompactSet::cantor_dust(1, 0.4, 2));
    const auto v = classify_geometric(twisted, 0.3, 2);
    CHECK(v.markov_unique == Ternary::indeterminate);
    CHECK(v.essentially_self_adjoint == Ternary::indeterminate);
    CHECK(v.notes.find("refused") != std::string::npos);
}

TEST_CASE("probabilistic route honours its hypotheses", "[classify]")
{
    // d < alpha and d < 2 alpha: both routes out of hypothesis, no sampling
    ProbabilisticOptions opts;
    opts.trials = 10; // won't be used
    const auto v = classify_probabilistic(CompactSet::origin(1), 2.0, 1, opts);
    CHECK(v.markov_unique == Ternary::indeterminate);
    CHECK(v.essentially_self_adjoint == Ternary::indeterminate);
    CHECK(v.notes.find("out of hypothesis") != std::string::npos);
}

TEST_CASE("probabilistic route on Brownian motion vs a point (reduced scale)", "[classify][slow]")
{
    ProbabilisticOptions opts;
    opts.trials = 20000;
    opts.eps_levels = {0.4, 0.2, 0.1, 0.05};
    opts.n_starts = 1;
    // d = 3: MU route polar (BM misses points), ESA route non-polar
    const auto v = classify_probabilistic(CompactSet::origin(3), 2.0, 3, opts);
    CHECK(v.markov_unique == Ternary::yes);
    CHECK(v.essentially_self_adjoint == Ternary::no);
}

TEST_CASE("verdict reconciliation forbids ESA=True with MU=False", "[classify]")
{
    Verdict v;
    v.markov_unique = Ternary::no;
    v.essentially_self_adjoint = Ternary::yes;
    v.reconcile();
    CHECK(v.essentially_self_adjoint == Ternary::indeterminate);
    CHECK(v.esa_demoted);
    CHECK(v.markov_unique == Ternary::no);
}

TEST_CASE("cross_check merges routes and spots no false contradictions", "[classify]")
{
    CrossCheckOptions opts;
    opts.run_probabilistic = false;
    const auto rep = cross_check(CompactSet::origin(3), 2.0, 3, opts);
    CHECK_FALSE(rep.falsification);
    CHECK(rep.headline_mu == Ternary::yes);
    CHECK(rep.headline_esa == Ternary::no);
    CHECK(rep.headline_mu_route == Route::analytic);
    // boundary case alpha=2, d=4: ESA True analytically; geometric is at the
    // threshold band for the point (0 vs 0): on-boundary Indeterminate is
    // acceptable, confident wrong is not
    const auto rep4 = cross_check(CompactSet::origin(4), 2.0, 4, opts);
    CHECK_FALSE(rep4.falsification);
    CHECK(rep4.headline_esa == Ternary::yes);
}

TEST_CASE("ESA monotonicity in alpha among confident analytic verdicts", "[classify][property]")
{
    // if ESA holds at alpha, it holds at every smaller alpha
    for (int d = 1; d <= 4; ++d) {
        Ternary prev = Ternary::indeterminate;
        for (double alpha : {2.0, 1.5, 1.0, 0.5}) { // decreasing
            const auto v = classify_analytic(CompactSet::origin(d), alpha, d);
            if (prev == Ternary::yes && v.essentially_self_adjoint != Ternary::indeterminate)
                CHECK(v.essentially_self_adjoint == Ternary::yes);
            if (v.essentially_self_adjoint != Ternary::indeterminate) prev = v.essentially_self_adjoint;
        }
    }
}
