#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraclap/rng.hpp"
#include "fraclap/sets.hpp"

using namespace fraclap;
using namespace fraclap::sets;
using Catch::Approx;

TEST_CASE("distance oracles on the basic variants", "[sets]")
{
    const auto seg = CompactSet::segment({0.0, 0.0}, {1.0, 0.0});
    CHECK(seg.distance({0.5, 1.0}) == Approx(1.0));
    CHECK(seg.distance({2.0, 0.0}) == Approx(1.0));
    CHECK(seg.distance({0.25, 0.0}) == Approx(0.0).margin(1e-15));

    const auto sph = CompactSet::sphere({0.0, 0.0}, 1.0);
    CHECK(sph.distance({3.0, 0.0}) == Approx(2.0));
    CHECK(sph.distance({0.0, 0.0}) == Approx(1.0));

    const auto pt = CompactSet::origin(3);
    CHECK(pt.distance({1.0, 2.0, 2.0}) == Approx(3.0));

    CHECK(CompactSet::empty(2).distance({0.0, 0.0}) == math::inf());
    CHECK_THROWS_AS(pt.distance(Point{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("cantor dust distance is exact at finite depth", "[sets]")
{
    const auto cantor = CompactSet::middle_thirds_cantor();
    CHECK(cantor.distance({0.5}) == Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(cantor.distance({-1.0}) == Approx(1.0));
    CHECK(cantor.distance({1.0 / 3.0}) == Approx(0.0).margin(1e-12));
    CHECK(cantor.distance({0.12}) == Approx(0.12 - 1.0 / 9.0).epsilon(1e-9));
    CHECK(cantor.distance_error_bound() < 1e-12);

    const auto dust2 = CompactSet::cantor_dust(2, 0.25, 4);
    CHECK(dust2.distance({0.5, 0.5}) == Approx(std::hypot(0.25, 0.25)).epsilon(1e-12));
}

TEST_CASE("distance is 1-Lipschitz", "[sets][property]")
{
    rng::Stream rng(99, 3);
    const auto sets_to_try = {CompactSet::middle_thirds_cantor(), CompactSet::unit_segment(1)};
    for (const auto& set : sets_to_try) {
        for (int i = 0; i < 200; ++i) {
            const double x = rng.uniform(-2.0, 2.0);
            const double y = rng.uniform(-2.0, 2.0);
            const double dx = set.distance(&x);
            const double dy = set.distance(&y);
            CHECK(std::fabs(dx - dy) <= std::fabs(x - y) + 1e-12);
        }
    }
}

TEST_CASE("discretizations match the stated constructions", "[sets]")
{
    const auto cantor = CompactSet::middle_thirds_cantor();
    const auto net2 = cantor.discretize(2);
    REQUIRE(net2.size() == 4);
    CHECK(net2.point(0)[0] == Approx(1.0 / 18.0));
    CHECK(net2.point(1)[0] == Approx(5.0 / 18.0));
    CHECK(net2.point(2)[0] == Approx(13.0 / 18.0));
    CHECK(net2.point(3)[0] == Approx(17.0 / 18.0));

    const auto seg = CompactSet::unit_segment(1);
    const auto segnet = seg.discretize(3);
    CHECK(segnet.size() == 9);
    CHECK(segnet.resolution == Approx(0.125));

    const auto pts = CompactSet::finite_points({{0.0}, {0.7}}, 1);
    const auto pnet = pts.discretize(5);
    CHECK(pnet.size() == 2);
    CHECK(pnet.resolution == 0.0);
}

TEST_CASE("nets cover the set and keep separation", "[sets][property]")
{
    rng::Stream rng(7, 11);
    for (const auto& set : {CompactSet::middle_thirds_cantor(), CompactSet::unit_segment(2),
                            CompactSet::sphere({0.0, 0.0, 0.0}, 1.0)}) {
        const auto net = set.discretize(3);
        const double h = net.resolution;
        // separation >= h/2
        double min_sep = math::inf();
        for (std::size_t i = 0; i < net.size(); ++i)
            for (std::size_t j = i + 1; j < net.size(); ++j)
                min_sep = std::min(min_sep, sets::detail::dist_point(net.point(i), net.point(j), net.dim));
        CHECK(min_sep >= 0.5 * h);
        // every net point is on (or within tolerance of) the set
        for (std::size_t i = 0; i < net.size(); ++i)
            CHECK(set.distance(net.point(i)) <= h * 0.51 + set.distance_error_bound());
    }
}

TEST_CASE("refinement: every coarse point is near a finer point", "[sets][property]")
{
    for (const auto& set : {CompactSet::middle_thirds_cantor(), CompactSet::unit_segment(1)}) {
        const auto coarse = set.discretize(3);
        const auto fine = set.discretize(4);
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            double best = math::inf();
            for (std::size_t j = 0; j < fine.size(); ++j)
                best = std::min(best, sets::detail::dist_point(coarse.point(i), fine.point(j), coarse.dim));
            CHECK(best <= coarse.resolution);
        }
    }
}

TEST_CASE("box dimension estimates", "[sets]")
{
    std::vector<double> scales;
    for (int k = 2; k <= 7; ++k) scales.push_back(std::pow(3.0, -k));

    const auto bd_pt = box_dimension(CompactSet::origin(2), scales);
    CHECK(bd_pt.value == Approx(0.0).margin(1e-12));

    const auto bd_seg = box_dimension(CompactSet::unit_segment(1), scales);
    CHECK(bd_seg.value == Approx(1.0).margin(0.02));

    const auto bd_cantor = box_dimension(CompactSet::middle_thirds_cantor(), scales);
    CHECK(bd_cantor.value == Approx(std::log(2.0) / std::log(3.0)).margin(0.02));
    CHECK(bd_cantor.r2 > 0.999);

    // product dimension dominates the factors
    const auto prod = CompactSet::product(CompactSet::unit_segment(1),
                                          CompactSet::finite_points({{0.0}, {1.0}}, 1));
    const auto bd_prod = box_dimension(prod, scales);
    CHECK(bd_prod.value >= std::max(bd_seg.value, 0.0) - 0.02);

    CHECK_THROWS_AS(box_dimension(CompactSet::origin(1), std::vector<double>{0.1, 0.2, 0.3}),
                    std::invalid_argument); // not decreasing
    CHECK_THROWS_AS(box_dimension(CompactSet::origin(1), std::vector<double>{0.1, 0.05}),
                    std::invalid_argument); // fewer than 3 scales
}

TEST_CASE("analytic dimension knowledge and refusals", "[sets]")
{
    CHECK(CompactSet::middle_thirds_cantor().analytic_dimension().value() ==
          Approx(std::log(2.0) / std::log(3.0)));
    CHECK(CompactSet::unit_segment(3).analytic_dimension().value() == 1.0);
    CHECK(CompactSet::sphere({0.0, 0.0, 0.0}, 2.0).analytic_dimension().value() == 2.0);
    // two fractal factors with different ratios: refuse
    const auto twisted = CompactSet::product(CompactSet::cantor_dust(1, 1.0 / 3.0, 2),
                                             CompactSet::cantor_dust(1, 0.4, 2));
    CHECK_FALSE(twisted.analytic_dimension().has_value());
}

TEST_CASE("dimension thresholds", "[sets]")
{
    const auto t1 = dimension_thresholds(2.0, 5);
    CHECK(t1.mu_threshold == Approx(3.0));
    CHECK(t1.esa_threshold == Approx(1.0));
    const auto t2 = dimension_thresholds(1.0, 1);
    CHECK(t2.mu_threshold == Approx(0.0));
    CHECK(t2.esa_threshold == Approx(-1.0));
    const auto t3 = dimension_thresholds(0.5, 3);
    CHECK(t3.mu_threshold == Approx(2.5));
    CHECK(t3.esa_threshold == Approx(2.0));
    CHECK_THROWS_AS(dimension_thresholds(2.5, 3), std::invalid_argument);
}
