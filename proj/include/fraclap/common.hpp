#pragma once

// Shared basics: error types, math constants, small helpers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fraclap {

inline constexpr const char* version_string = "0.1.0";

// Raised when a quadrature or special-function evaluation cannot reach the
// requested accuracy. Callers must never receive a silently wrong value.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

namespace math {

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline double sq(double x) { return x * x; }

// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_surface(int d)
{
    if (d < 1) throw std::invalid_argument("sphere_surface: d must be >= 1");
    return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace math
} // namespace fraclap
