#pragma once

// Counter-based random number streams.
//
// Every variate is a pure function of (seed, stream id, draw index): the
// generator applies the SplitMix64 output permutation to an affine counter
// sequence, so streams can be created per Monte Carlo trial and drawn from
// in parallel without any shared state. SplitMix64 passes BigCrush.

#include <cmath>
#include <cstdint>

#include "fraclap/common.hpp"

namespace fraclap::rng {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z)
{
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : base_(mix64(seed ^ mix64(stream_id ^ golden_gamma)) ^ (stream_id * golden_gamma))
    {
    }

    std::uint64_t seed_bits() const { return base_; }

    std::uint64_t next_u64() { return mix64(base_ + (++counter_) * golden_gamma); }

    // i-th raw draw, independent of the sequential cursor.
    std::uint64_t at(std::uint64_t index) const { return mix64(base_ + (index + 1) * golden_gamma); }

    // Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential() { return -std::log(uniform01()); }

    // Standard normal via Box-Muller; the pair partner is cached, so draw
    // order is well defined and reproducible.
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * math::pi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    void fill_normal(double* out, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    }

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fraclap::rng
