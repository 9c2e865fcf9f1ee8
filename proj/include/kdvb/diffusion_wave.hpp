#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "kdvb/quadrature.hpp"
#include "kdvb/special.hpp"

namespace kdvb {

struct ModelParams {
    double b = 1.0;
    double c = 0.0;
    double k = 0.0;

    ModelParams() = default;
    ModelParams(double b_, double c_, double k_) : b(b_), c(c_), k(k_) { validate(); }

    void validate() const
    {
        if (b == 0.0 || !std::isfinite(b)) throw std::invalid_argument("ModelParams: b must be nonzero and finite");
        if (!std::isfinite(c) || !std::isfinite(k)) throw std::invalid_argument("ModelParams: c and k must be finite");
    }

    /// f(u) = (b/2) u^2 + (c/3) u^3
    double flux(double u) const { return u * u * (0.5 * b + (c / 3.0) * u); }

    /// b^2 k / 8 + c / 3, the combination multiplying the V profile.
    double dispersion_factor() const { return b * b * k / 8.0 + c / 3.0; }
};

namespace detail {

inline double wave_theta(double b, double delta) { return std::expm1(0.5 * b * delta); }

inline double wave_denominator(double x, double theta)
{
    const double D = sqrt_pi + theta * gauss_tail(0.5 * x);
    if (!(D > 1e-300) || !std::isfinite(D))
        throw std::domain_error("diffusion wave: denominator vanishes at x=" + std::to_string(x));
    return D;
}

} // namespace detail

/// Self-similar profile of the Burgers diffusion wave with mass delta.
inline double chi_star(double x, double b, double delta)
{
    if (delta == 0.0) return 0.0;
    const double th = detail::wave_theta(b, delta);
    return th * std::exp(-0.25 * x * x) / (b * detail::wave_denominator(x, th));
}

inline double chi(double x, double t, double b, double delta)
{
    if (t < 0.0) throw std::invalid_argument("chi: t must be nonnegative");
    const double s = std::sqrt(1.0 + t);
    return chi_star(x / s, b, delta) / s;
}

/// exp((b/2) * integral of chi_star over (-inf, x]) in closed form.
inline double eta_star(double x, double b, double delta)
{
    if (delta == 0.0) return 1.0;
    const double th = detail::wave_theta(b, delta);
    return sqrt_pi * std::exp(0.5 * b * delta) / detail::wave_denominator(x, th);
}

inline double eta(double x, double t, double b, double delta)
{
    return eta_star(x / std::sqrt(1.0 + t), b, delta);
}

/// d/dx eta(x,t) = (b/2) chi eta.
inline double eta_x(double x, double t, double b, double delta)
{
    return 0.5 * b * chi(x, t, b, delta) * eta(x, t, b, delta);
}

/// Integral of chi_star over (-inf, x], i.e. (2/b) log eta_star, without cancellation in either tail.
inline double chi_star_cumulative(double x, double b, double delta)
{
    if (delta == 0.0) return 0.0;
    const double th = detail::wave_theta(b, delta);
    if (x >= 0.0) return delta - (2.0 / b) * std::log1p(th * gauss_tail(0.5 * x) / sqrt_pi);
    return -(2.0 / b) * std::log1p(-th * gauss_tail(-0.5 * x) / (sqrt_pi * (1.0 + th)));
}

/// Integral of chi_star over [x, inf).
inline double chi_star_upper_tail(double x, double b, double delta)
{
    if (delta == 0.0) return 0.0;
    if (x >= 0.0) {
        const double th = detail::wave_theta(b, delta);
        return (2.0 / b) * std::log1p(th * gauss_tail(0.5 * x) / sqrt_pi);
    }
    return delta - chi_star_cumulative(x, b, delta);
}

/// (b chi_star - x) exp(-x^2/4) eta_star
inline double V_star(double x, double b, double delta)
{
    return (b * chi_star(x, b, delta) - x) * std::exp(-0.25 * x * x) * eta_star(x, b, delta);
}

/// Integral over R of chi_star^3 / eta_star.
inline double d_constant(double b, double delta, double tol = 1e-12)
{
    if (delta == 0.0) return 0.0;
    auto f = [&](double y) {
        const double c = chi_star(y, b, delta);
        return c * c * c / eta_star(y, b, delta);
    };
    return adaptive_quad(f, -60.0, 0.0, tol) + adaptive_quad(f, 0.0, 60.0, tol);
}

} // namespace kdvb
