#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraclap/additive.hpp"
#include "fraclap/stats.hpp"
#include "oracles.hpp"

using namespace fraclap;
using namespace fraclap::additive;
using namespace fraclap::sets;
using Catch::Approx;

TEST_CASE("additive sheet construction identities", "[additive]")
{
    rng::Stream rng(1, 1);
    const auto sheet = simulate_additive(2.0, 2, 1.0, 0.125, rng);
    std::vector<double> v(2);
    // value at (0,0) is exactly 0
    sheet.value(0, 0, v.data());
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
    // value at (t, 0) equals the first path exactly
    for (std::size_t i = 0; i < sheet.axis_size(); ++i) {
        sheet.value(i, 0, v.data());
        CHECK(v[0] == sheet.first[i * 2]);
        CHECK(v[1] == sheet.first[i * 2 + 1]);
    }
}

TEST_CASE("additive sheet variance is t1 + t2 per coordinate", "[additive]")
{
    const std::size_t reps = 200000;
    double acc = 0.0;
    std::vector<double> v(1);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        rng::Stream rng(44, rep);
        const auto sheet = simulate_additive(2.0, 1, 1.0, 0.25, rng);
        sheet.value(4, 2, v.data()); // t1 = 1.0, t2 = 0.5
        acc += v[0] * v[0];
    }
    const double n = static_cast<double>(reps);
    CHECK(acc / n == Approx(1.5).margin(3.0 * 1.5 * std::sqrt(2.0 / n)));
}

TEST_CASE("additive axis marginal matches the one-parameter law (KS)", "[additive][property]")
{
    const std::size_t n = 4000;
    std::vector<double> from_sheet(n), from_path(n);
    for (std::size_t i = 0; i < n; ++i) {
        rng::Stream r1(91, i);
        const auto sheet = simulate_additive(1.5, 1, 1.0, 0.125, r1);
        from_sheet[i] = sheet.first[8]; // X at t = 1 (axis restriction of the sheet)
        rng::Stream r2(17, i + 1000000);
        levy::PathConfig cfg;
        cfg.alpha = 1.5;
        cfg.dim = 1;
        cfg.horizon = 1.0;
        cfg.dt = 0.125;
        from_path[i] = levy::simulate_path(cfg, r2).back();
    }
    CHECK(stats::ks_two_sample_pvalue(from_sheet, from_path) > 0.01);
}

TEST_CASE("branch-and-bound minimum equals brute force", "[additive]")
{
    for (auto [alpha, d] : {std::pair{2.0, 2}, {1.5, 3}}) {
        for (std::uint64_t trial = 0; trial < 8; ++trial) {
            rng::Stream rng(5000 + trial, trial);
            const auto sheet = simulate_additive(alpha, d, 1.0, 1.0 / 24.0, rng);
            std::vector<double> start(d, 0.0);
            start[0] = 0.8;
            const auto point_set = CompactSet::origin(d);
            const double bf = additive_min_distance_bruteforce(sheet, start, point_set);
            const double bb = additive_min_distance(sheet, start, point_set);
            CHECK(bb == bf); // exact equality
            // non-finite target set exercises the Lipschitz bound path
            std::vector<double> a(d, -0.1), b(d, 0.1);
            const auto seg = CompactSet::segment(a, b);
            const double bf2 = additive_min_distance_bruteforce(sheet, start, seg);
            const double bb2 = additive_min_distance(sheet, start, seg);
            CHECK(bb2 == bf2);
        }
    }
}

TEST_CASE("hitting config validation", "[additive]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::one_param_stable;
    cfg.alpha = 2.0;
    cfg.dim = 1;
    cfg.start = {0.2};
    cfg.eps_levels = {0.3, 0.1};
    cfg.trials = 10;
    const auto pt = CompactSet::origin(1);
    // start already within the largest epsilon shell: rejected
    CHECK_THROWS_AS(cfg.validate(pt), std::invalid_argument);
    cfg.start = {1.0};
    CHECK_NOTHROW(cfg.validate(pt));
    cfg.eps_levels = {0.1, 0.3};
    CHECK_THROWS_AS(cfg.validate(pt), std::invalid_argument);
}

TEST_CASE("hit counts are monotone in epsilon under common random numbers", "[additive][property]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::one_param_stable;
    cfg.alpha = 1.5;
    cfg.dim = 2;
    cfg.start = {1.0, 0.0};
    cfg.eps_levels = {0.5, 0.35, 0.2, 0.1, 0.05};
    cfg.trials = 10000;
    const auto est = hitting_estimate(cfg, CompactSet::origin(2), 777);
    REQUIRE(est.levels.size() == 5);
    for (std::size_t i = 1; i < est.levels.size(); ++i)
        CHECK(est.levels[i].hits <= est.levels[i - 1].hits); // exact, shared paths
    // frequencies nondecreasing in eps (same statement, spec orientation)
    for (std::size_t i = 1; i < est.levels.size(); ++i)
        CHECK(est.levels[i].freq <= est.levels[i - 1].freq);
}

TEST_CASE("polarity verdict rules", "[additive]")
{
    HittingThresholds th;
    // all-zero counts with 1e6 trials: Polar with the rule-of-three style bound
    {
        HittingEstimate est;
        for (double eps : {0.4, 0.2, 0.1}) {
            LevelStat l;
            l.eps = eps;
            l.hits = 0;
            l.trials = 1000000;
            est.levels.push_back(l);
        }
        est.zero_hit_bound = stats::zero_hit_upper_bound(1000000);
        CHECK(est.zero_hit_bound == Approx(3.7e-6).epsilon(0.01));
        CHECK(polarity_verdict(est, th) == Polarity::polar);
    }
    // power-law decaying frequencies: Polar via kappa
    {
        HittingEstimate est;
        est.kappa = 1.05;
        est.kappa_tail = 1.0;
        est.kappa_levels = 4;
        est.levels.resize(4);
        est.levels[0].hits = 100; // not all-zero
        CHECK(polarity_verdict(est, th) == Polarity::polar);
    }
    // flat frequencies with CI excluding zero: NonPolar
    {
        HittingEstimate est;
        est.kappa = 0.06;
        est.kappa_tail = 0.03;
        est.kappa_levels = 4;
        est.limit_freq = 0.3;
        est.limit_se = 0.01;
        est.limit_ci_excludes_zero = true;
        est.levels.resize(4);
        est.levels[0].hits = 1000;
        CHECK(polarity_verdict(est, th) == Polarity::non_polar);
    }
    // ambiguous slope: Indeterminate
    {
        HittingEstimate est;
        est.kappa = 0.3;
        est.kappa_tail = 0.3;
        est.kappa_levels = 4;
        est.levels.resize(4);
        est.levels[0].hits = 1000;
        CHECK(polarity_verdict(est, th) == Polarity::indeterminate);
    }
}

TEST_CASE("one-dimensional reflection sanity at reduced scale", "[additive][slow]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::one_param_stable;
    cfg.alpha = 2.0;
    cfg.dim = 1;
    cfg.start = {1.0};
    cfg.eps_levels = {0.2, 0.1, 0.05};
    cfg.trials = 30000;
    cfg.step_refinement = 2.0;
    const auto est = hitting_estimate(cfg, CompactSet::origin(1), 24601);
    CHECK(est.limit_freq == Approx(oracles::reflection_hit_probability()).margin(0.02));
    CHECK(est.verdict == Polarity::non_polar);
}

TEST_CASE("per-level estimator couples the grid to each epsilon", "[additive]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::one_param_stable;
    cfg.alpha = 2.0;
    cfg.dim = 3;
    cfg.start = {1.0, 0.0, 0.0};
    cfg.eps_levels = {0.4, 0.2, 0.1};
    cfg.trials = 5000;
    const auto est = hitting_estimate_per_level(cfg, CompactSet::origin(3), 4242);
    REQUIRE(est.levels.size() == 3);
    for (const auto& l : est.levels) CHECK(l.trials == 5000);
    CHECK(std::isfinite(est.kappa));
    CHECK(est.kappa > 0.5); // point is polar for BM in d = 3
    CHECK(est.notes.find("per-level") != std::string::npos);
}

TEST_CASE("hitting_frequency wrapper", "[additive]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::one_param_stable;
    cfg.alpha = 2.0;
    cfg.dim = 1;
    cfg.start = {1.0};
    cfg.eps_levels = {0.3};
    cfg.trials = 4000;
    const auto [hits, trials] = hitting_frequency(cfg, CompactSet::origin(1), 0.3, 999);
    CHECK(trials == 4000);
    CHECK(hits > 0);
    CHECK(hits < trials);
}

TEST_CASE("brownian sheet hitting runs and respects monotonicity", "[additive]")
{
    HittingConfig cfg;
    cfg.kind = ProcessKind::brownian_sheet;
    cfg.alpha = 2.0;
    cfg.dim = 2;
    cfg.start = {1.0, 0.0};
    cfg.eps_levels = {0.45, 0.3};
    cfg.trials = 300;
    const auto est = hitting_estimate(cfg, CompactSet::origin(2), 31337);
    REQUIRE(est.levels.size() == 2);
    CHECK(est.levels[1].hits <= est.levels[0].hits);
}
