#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraclap/capacity.hpp"
#include "fraclap/rng.hpp"
#include "oracles.hpp"

using namespace fraclap;
using namespace fraclap::capacity;
using namespace fraclap::sets;
using namespace fraclap::kernels;
using Catch::Approx;

TEST_CASE("energy: pair and atomic rules", "[capacity]")
{
    // two points at distance r, weights 1/2 each: off-diagonal r^{-s}/2
    const auto mu = DiscreteMeasure::from_points({{0.0}, {2.0}}, {0.5, 0.5});
    const RadialKernel k1(KernelSpec::riesz(1.0, 1));
    CHECK(energy(mu, k1, DiagonalRule::off_diagonal).value == Approx(0.25));

    // single atom, riesz s > 0, atomic -> +inf
    const auto atom = DiscreteMeasure::from_points({{0.0, 0.0, 0.0}}, {1.0});
    const RadialKernel k3(KernelSpec::riesz(1.0, 3));
    CHECK(std::isinf(energy(atom, k3, DiagonalRule::atomic).value));

    // single atom, bessel order 2 alpha > d, atomic -> gamma_{2 alpha}(0) finite
    const auto atom1 = DiscreteMeasure::from_points({{0.0}}, {1.0});
    const RadialKernel kb(KernelSpec::bessel(3.0, 1)); // alpha = 1.5, 2 alpha = 3 > d = 1
    CHECK(energy(atom1, kb, DiagonalRule::atomic).value == Approx(bessel_kernel_at_zero(3.0, 1)));

    // coincident distinct points with unbounded kernel: +inf reported
    const auto coincident = DiscreteMeasure::from_points({{0.0}, {0.0}}, {0.5, 0.5});
    CHECK(std::isinf(energy(coincident, k1, DiagonalRule::off_diagonal).value));
}

TEST_CASE("energy invariances", "[capacity][property]")
{
    rng::Stream rng(5, 0);
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    std::vector<double> w(12);
    double mass = 0.0;
    for (auto& x : w) {
        x = rng.uniform(0.1, 1.0);
        mass += x;
    }
    for (auto& x : w) x /= mass;
    const RadialKernel k(KernelSpec::riesz(0.6, 2));
    const double base = energy(DiscreteMeasure::from_points(pts, w), k, DiagonalRule::off_diagonal).value;

    // permutation invariance
    std::vector<Point> perm_pts(pts.rbegin(), pts.rend());
    std::vector<double> perm_w(w.rbegin(), w.rend());
    CHECK(energy(DiscreteMeasure::from_points(perm_pts, perm_w), k, DiagonalRule::off_diagonal).value ==
          Approx(base).epsilon(1e-13));

    // rigid motion invariance (rotation + translation)
    const double th = 0.813;
    std::vector<Point> moved;
    for (const auto& p : pts)
        moved.push_back({std::cos(th) * p[0] - std::sin(th) * p[1] + 3.0,
                         std::sin(th) * p[0] + std::cos(th) * p[1] - 1.0});
    CHECK(energy(DiscreteMeasure::from_points(moved, w), k, DiagonalRule::off_diagonal).value ==
          Approx(base).epsilon(1e-12));

    // riesz scaling law: lambda = 2 multiplies order-s energy by 2^{-s}
    std::vector<Point> scaled;
    for (const auto& p : pts) scaled.push_back({2.0 * p[0], 2.0 * p[1]});
    const double es = energy(DiscreteMeasure::from_points(scaled, w), k, DiagonalRule::off_diagonal).value;
    CHECK(es == Approx(std::pow(2.0, -0.6) * base).epsilon(1e-13));
}

TEST_CASE("equilibrium: symmetric configurations are exact", "[capacity]")
{
    const RadialKernel k(KernelSpec::riesz(1.0, 1));
    std::vector<double> two{0.0, 2.0};
    const auto eq2 = equilibrium(two.data(), 2, 1, k);
    CHECK(eq2.weights[0] == Approx(0.5).margin(1e-9));
    CHECK(eq2.weights[1] == Approx(0.5).margin(1e-9));
    CHECK(eq2.energy == Approx(0.25).margin(1e-12));
    CHECK(eq2.kkt_residual <= 1e-6);

    const RadialKernel k2(KernelSpec::riesz(0.5, 2));
    std::vector<double> tri{0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0};
    const auto eq3 = equilibrium(tri.data(), 3, 2, k2);
    for (double w : eq3.weights) CHECK(w == Approx(1.0 / 3.0).margin(1e-9));
    CHECK(eq3.converged);
}

TEST_CASE("equilibrium matches the linear-solve oracle and never beats it unfairly", "[capacity]")
{
    const auto seg = CompactSet::unit_segment(1);
    const RadialKernel logk(KernelSpec::riesz(0.0, 1));
    std::vector<double> oracle_energies;
    for (int lev : {4, 5, 6}) {
        const auto net = seg.discretize(lev);
        const auto oracle = oracles::equilibrium_linear_solve(net.coords.data(), net.size(), net.dim, logk);
        REQUIRE(oracle.full_support);
        const auto eq = equilibrium(net, logk);
        CHECK(eq.energy == Approx(oracle.off_diagonal_energy).epsilon(1e-4));
        // uniform bound from the contract
        const auto uni = DiscreteMeasure::uniform_on(net);
        CHECK(eq.energy <= energy(uni, logk, DiagonalRule::off_diagonal).value + 1e-12);
        oracle_energies.push_back(oracle.off_diagonal_energy);
    }
    // oracle itself heads toward ln 4
    CHECK(oracle_energies.back() > oracle_energies.front());
    CHECK(oracle_energies.back() < std::log(4.0));
}

TEST_CASE("equilibrium energies extrapolate to the classical segment value", "[capacity][slow]")
{
    // independent QP oracle at n in {17, 33, 65, 129}, Richardson-extrapolated
    const auto seg = CompactSet::unit_segment(1);
    const RadialKernel logk(KernelSpec::riesz(0.0, 1));
    std::vector<double> es;
    for (int lev : {4, 5, 6, 7}) {
        const auto net = seg.discretize(lev);
        es.push_back(oracles::equilibrium_linear_solve(net.coords.data(), net.size(), net.dim, logk)
                         .off_diagonal_energy);
    }
    const double lim = stats::aitken_limit(es);
    CHECK(lim == Approx(std::log(4.0)).epsilon(0.03));
}

TEST_CASE("equilibrium monotonicity under support growth", "[capacity][property]")
{
    // adding a well-separated point enlarges the feasible set: the
    // regularized minimum cannot increase (diagonal self-energies of the
    // existing points are unchanged)
    const RadialKernel k(KernelSpec::riesz(0.5, 1));
    std::vector<double> base{0.0, 0.3, 0.7, 1.0};
    std::vector<double> bigger{0.0, 0.3, 0.7, 1.0, 2.5};
    auto regularized_energy = [&](const std::vector<double>& pts) {
        const auto K = capacity::detail::assemble_matrix(pts.data(), pts.size(), 1, k, true, 0.0);
        const auto res = capacity::detail::simplex_qp_minimize(K, pts.size(), {});
        double e = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j) e += res.weights[i] * res.weights[j] * K[i * pts.size() + j];
        return e;
    };
    CHECK(regularized_energy(bigger) <= regularized_energy(base) + 1e-10);
}

TEST_CASE("capacity_estimate: finite sets", "[capacity]")
{
    const std::vector<int> levels{4, 5, 6};
    // Sigma = {0}, riesz s > 0 -> Zero (Dirac argument)
    const auto pt3 = CompactSet::origin(3);
    CHECK(capacity_estimate(pt3, KernelSpec::riesz(1.0, 3), levels).verdict == CapacityVerdict::zero);
    // bounded kernel: positive with capacity 1/gamma(0)
    const auto pt1 = CompactSet::origin(1);
    const auto est = capacity_estimate(pt1, KernelSpec::bessel(1.5, 1), levels);
    CHECK(est.verdict == CapacityVerdict::positive);
    CHECK(est.capacity_value == Approx(1.0 / bessel_kernel_at_zero(1.5, 1)).epsilon(1e-9));
    // empty set: zero capacity
    CHECK(capacity_estimate(CompactSet::empty(2), KernelSpec::bessel(3.0, 2), levels).verdict ==
          CapacityVerdict::zero);
}

TEST_CASE("capacity_estimate: Cantor dichotomy around its dimension", "[capacity][slow]")
{
    const auto cantor = CompactSet::middle_thirds_cantor();
    const std::vector<int> levels{4, 5, 6, 7, 8, 9};
    CHECK(capacity_estimate(cantor, KernelSpec::riesz(0.5, 1), levels).verdict == CapacityVerdict::positive);
    CHECK(capacity_estimate(cantor, KernelSpec::riesz(0.7, 1), levels).verdict == CapacityVerdict::zero);
}

TEST_CASE("capacity_estimate: unit segment under the log kernel", "[capacity][slow]")
{
    const auto seg = CompactSet::unit_segment(2); // embedded in the plane
    const std::vector<int> levels{4, 5, 6, 7, 8};
    const auto est = capacity_estimate(seg, KernelSpec::riesz(0.0, 2), levels);
    CHECK(est.verdict == CapacityVerdict::positive);
    CHECK(est.capacity_value == Approx(1.0 / std::log(4.0)).epsilon(0.02));
}

TEST_CASE("capacity_estimate: steep divergence classifies as Zero", "[capacity]")
{
    // segment (dim 1) under a kernel of Riesz order 3: energies grow like a
    // power of n, far too convex for the linear-regression gate alone
    const auto seg = CompactSet::unit_segment(5);
    const std::vector<int> levels{4, 5, 6, 7, 8};
    const auto est = capacity_estimate(seg, KernelSpec::bessel(2.0, 5), levels);
    CHECK(est.verdict == CapacityVerdict::zero);
}

TEST_CASE("capacity_estimate: too few levels is indeterminate, not an error", "[capacity]")
{
    const auto seg = CompactSet::unit_segment(1);
    const auto est = capacity_estimate(seg, KernelSpec::riesz(0.0, 1), std::vector<int>{4, 5});
    CHECK(est.verdict == CapacityVerdict::indeterminate);
    CHECK(est.notes.find("fewer than 3") != std::string::npos);
}

TEST_CASE("bessel-riesz consistency", "[capacity][slow]")
{
    const std::vector<int> levels{4, 5, 6, 7, 8, 9};
    // point, alpha=1, d=3: both Zero
    {
        const auto rep = bessel_riesz_consistency(CompactSet::origin(3), 1.0, 3, levels);
        CHECK(rep.bessel_side.verdict == CapacityVerdict::zero);
        CHECK(rep.riesz_side.verdict == CapacityVerdict::zero);
        CHECK(rep.outcome == ConsistencyOutcome::agree);
    }
    // point, alpha=1, d=2 (2 alpha = d, riesz order 0): both Zero
    {
        const auto rep = bessel_riesz_consistency(CompactSet::origin(2), 1.0, 2, levels);
        CHECK(rep.bessel_side.verdict == CapacityVerdict::zero);
        CHECK(rep.riesz_side.verdict == CapacityVerdict::zero);
        CHECK(rep.outcome == ConsistencyOutcome::agree);
    }
    // cantor, alpha = 0.15 in d=1 (threshold 0.7 above the dimension): both Zero
    {
        const auto rep = bessel_riesz_consistency(CompactSet::middle_thirds_cantor(), 0.15, 1, levels);
        CHECK(rep.bessel_side.verdict == CapacityVerdict::zero);
        CHECK(rep.riesz_side.verdict == CapacityVerdict::zero);
        CHECK(rep.outcome == ConsistencyOutcome::agree);
        CHECK_FALSE(rep.toolkit_defect);
    }
    CHECK_THROWS_AS(bessel_riesz_consistency(CompactSet::origin(1), 1.0, 1, levels), std::invalid_argument);
}
