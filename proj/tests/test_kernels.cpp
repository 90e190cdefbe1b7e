#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fraclap/kernels.hpp"

using namespace fraclap;
using namespace fraclap::kernels;
using Catch::Approx;

TEST_CASE("riesz kernel values", "[kernels]")
{
    CHECK(riesz_kernel(1.0, 2.0) == Approx(0.5));
    CHECK(riesz_kernel(0.0, 1.0) == 0.0);
    CHECK(riesz_kernel(0.0, std::exp(-1.0)) == Approx(1.0));
    CHECK(riesz_kernel(0.0, 3.0) == 0.0); // truncated log is nonnegative
    CHECK_THROWS_AS(riesz_kernel(-0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(riesz_kernel(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("bessel kernel closed form matches known special cases", "[kernels]")
{
    // gamma_2 in d=1 is pi e^{-r} under the unnormalized Fourier convention
    for (double r : {0.05, 0.3, 1.0, 4.0})
        CHECK(bessel_kernel(2.0, 1, r) == Approx(math::pi * std::exp(-r)).epsilon(1e-12));
    CHECK(bessel_kernel_at_zero(2.0, 1) == Approx(math::pi).epsilon(1e-14));
    // value at zero only defined above the dimension
    CHECK_THROWS_AS(bessel_kernel_at_zero(1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(bessel_kernel(0.0, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_kernel(1.0, 0, 1.0), std::invalid_argument);
}

TEST_CASE("bessel kernel agrees with the independent quadrature route", "[kernels]")
{
    for (auto [a, d, r] : {std::tuple{1.0, 3, 0.5}, {2.0, 2, 0.25}, {0.7, 1, 1.0}, {3.0, 2, 2.0}}) {
        const double closed = bessel_kernel(a, d, r);
        const double quad = bessel_kernel_quadrature(a, d, r);
        CHECK(closed == Approx(quad).epsilon(1e-6));
    }
}

TEST_CASE("bessel kernel small-r asymptotics", "[kernels]")
{
    // a < d: gamma_a ~ c r^{a-d}
    {
        const double r1 = bessel_kernel(1.0, 3, 1e-4) * 1e-8;
        const double r2 = bessel_kernel(1.0, 3, 1e-6) * 1e-12;
        CHECK(std::fabs(r1 / r2 - 1.0) < 0.05);
        CHECK(r1 == Approx(bessel_asymptotic_constant(1.0, 3)).epsilon(0.05));
    }
    // a = d: gamma_d ~ c (-log r)
    {
        const double r1 = bessel_kernel(2.0, 2, 1e-4) / (-std::log(1e-4));
        const double r2 = bessel_kernel(2.0, 2, 1e-6) / (-std::log(1e-6));
        CHECK(std::fabs(r1 / r2 - 1.0) < 0.05);
    }
    // large r: exponential decay
    CHECK(bessel_kernel(1.0, 3, 30.0) < bessel_kernel(1.0, 3, 20.0) * std::exp(-9.0));
}

TEST_CASE("kernels are positive and nonincreasing in r", "[kernels][property]")
{
    const std::vector<KernelSpec> specs{KernelSpec::riesz(0.7, 2), KernelSpec::riesz(0.0, 2),
                                        KernelSpec::bessel(1.5, 2), KernelSpec::stable_resolvent(1.2, 2),
                                        KernelSpec::additive_resolvent(1.0, 2)};
    for (const auto& spec : specs) {
        const RadialKernel k(spec);
        double prev = math::inf();
        for (int i = 0; i < 24; ++i) {
            const double r = 1e-4 * std::pow(10.0 / 1e-4, i / 23.0);
            const double v = k(r);
            CHECK(v >= 0.0);
            CHECK(v <= prev * (1.0 + 1e-9));
            prev = v;
        }
    }
}

TEST_CASE("bessel self-convolution identity (with the (2 pi)^d volume factor)", "[kernels]")
{
    // Under this library's convention gamma_a * gamma_a = (2 pi)^d gamma_{2a}.
    const double a = 1.2;
    const int d = 1;
    auto f = [&](double t) { return bessel_kernel(a, d, t); };
    const double conv = radial_convolve(f, f, d, 0.5, 1e-6);
    const double target = std::pow(2.0 * math::pi, d) * bessel_kernel(2.0 * a, d, 0.5);
    CHECK(conv == Approx(target).epsilon(1e-4));
}

TEST_CASE("stable resolvent density: exact alpha=2 d=3 form", "[kernels]")
{
    for (double r : {0.01, 0.5, 2.0}) {
        const double want = std::exp(-std::sqrt(2.0) * r) / (2.0 * math::pi * r);
        CHECK(stable_resolvent_density(2.0, 3, r) == Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("stable resolvent density: small-r power behavior", "[kernels]")
{
    // alpha=2, d=3: value/r^{alpha-d} stable within 10% over r in [1e-3, 1e-2]
    {
        const double a = stable_resolvent_density(2.0, 3, 1e-3) * 1e-3;
        const double b = stable_resolvent_density(2.0, 3, 1e-2) * 1e-2;
        CHECK(std::fabs(a / b - 1.0) < 0.10);
    }
    // alpha=1, d=2: same window
    {
        const double a = stable_resolvent_density(1.0, 2, 1e-3) * 1e-3;
        const double b = stable_resolvent_density(1.0, 2, 1e-2) * 1e-2;
        CHECK(std::fabs(a / b - 1.0) < 0.10);
    }
}

TEST_CASE("stable resolvent density: finite at zero for alpha > d", "[kernels]")
{
    const double at_zero = stable_resolvent_at_zero(2.0, 1);
    CHECK(at_zero == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(stable_resolvent_density(2.0, 1, 1e-6) == Approx(at_zero).epsilon(1e-4));
    // subordinated case too
    const double z15 = stable_resolvent_at_zero(1.5, 1);
    CHECK(stable_resolvent_density(1.5, 1, 1e-7) == Approx(z15).epsilon(1e-3));
    CHECK_THROWS_AS(stable_resolvent_at_zero(1.0, 2), std::invalid_argument);
}

TEST_CASE("stable resolvent agrees with the oscillatory Fourier route", "[kernels][slow]")
{
    for (auto [alpha, d, r] : {std::tuple{1.0, 2, 0.3}, {1.5, 3, 0.5}}) {
        auto symbol = [alpha = alpha](double rho) {
            return 1.0 / (1.0 + std::pow(2.0, -0.5 * alpha) * std::pow(rho, alpha));
        };
        const double direct = radial_fourier_inverse(symbol, d, r, 1e-8);
        CHECK(stable_resolvent_density(alpha, d, r) == Approx(direct).epsilon(1e-5));
    }
}

TEST_CASE("additive resolvent: exact alpha=2 d=4 log form and log band", "[kernels]")
{
    for (double r : {0.01, 0.1}) {
        const double want = std::cyl_bessel_k(0.0, std::sqrt(2.0) * r) / (2.0 * math::pi * math::pi);
        CHECK(additive_resolvent_density(2.0, 4, r) == Approx(want).epsilon(1e-12));
    }
    // 2 alpha = d log band: ratio to -log r bounded above and below
    for (auto [alpha, d] : {std::pair{1.0, 2}, {2.0, 4}}) {
        double mn = math::inf(), mx = 0.0;
        for (double r : {1e-3, 1e-2, 1e-1}) {
            const double ratio = additive_resolvent_density(alpha, d, r) / (-std::log(r));
            mn = std::min(mn, ratio);
            mx = std::max(mx, ratio);
        }
        CHECK(mn > 0.0);
        CHECK(std::isfinite(mx));
        CHECK(mx / mn < 1.5);
    }
}

TEST_CASE("additive resolvent: power regime away from the critical line", "[kernels]")
{
    // alpha=2, d=5: u11 ~ c r^{4-d} = c r^{-1}
    const double a = additive_resolvent_density(2.0, 5, 1e-3) * 1e-3;
    const double b = additive_resolvent_density(2.0, 5, 1e-2) * 1e-2;
    CHECK(std::fabs(a / b - 1.0) < 0.10);
}

TEST_CASE("additive resolvent equals the radial self-convolution of the stable resolvent",
          "[kernels][slow]")
{
    const double alpha = 1.0;
    const int d = 2;
    const RadialKernel u1(KernelSpec::stable_resolvent(alpha, d), 1e-9, 1e4, 8192);
    auto f = [&](double t) { return u1(t); };
    for (double r : {0.05, 0.2}) {
        const double conv = radial_convolve(f, f, d, r, 2e-4);
        CHECK(additive_resolvent_density(alpha, d, r) == Approx(conv).epsilon(2e-3));
    }
}

TEST_CASE("radial kernel memo table matches direct evaluation", "[kernels]")
{
    const RadialKernel direct(KernelSpec::bessel(0.8, 2));
    const RadialKernel memo(KernelSpec::bessel(0.8, 2), 1e-6, 10.0);
    for (double r : {2e-6, 1e-4, 0.03, 0.9, 8.0})
        CHECK(memo(r) == Approx(direct(r)).epsilon(5e-4));
}

TEST_CASE("kernel at-zero table", "[kernels]")
{
    CHECK(std::isinf(RadialKernel(KernelSpec::riesz(0.5, 1)).at_zero()));
    CHECK(std::isinf(RadialKernel(KernelSpec::riesz(0.0, 1)).at_zero()));
    CHECK(std::isinf(RadialKernel(KernelSpec::bessel(1.0, 1)).at_zero())); // order = d
    CHECK(RadialKernel(KernelSpec::bessel(1.5, 1)).at_zero() == Approx(bessel_kernel_at_zero(1.5, 1)));
    CHECK(std::isinf(RadialKernel(KernelSpec::additive_resolvent(0.5, 1)).at_zero()));
    CHECK(RadialKernel(KernelSpec::additive_resolvent(0.75, 1)).at_zero() ==
          Approx(additive_resolvent_at_zero(0.75, 1)));
}
