#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kdvb {

inline constexpr double sqrt_pi = 1.7724538509055160273;

/// Gamma function for positive real arguments.
inline double gamma(double s)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::domain_error("gamma: argument must be positive and finite, got " + std::to_string(s));
    return std::tgamma(s);
}

/// Integral of exp(-y^2) over [x, infinity).
inline double gauss_tail(double x)
{
    return 0.5 * sqrt_pi * std::erfc(x);
}

} // namespace kdvb
