#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kdvb/quadrature.hpp"
#include "kdvb/special.hpp"

namespace kdvb {

/// A bounded weight m(y) with the points where it jumps or concentrates.
struct KernelWeight {
    std::function<double(double)> value;
    std::vector<double> breakpoints;
};

/// G(x,t) = exp(-x^2/4t) / sqrt(4 pi t).
inline double heat_kernel(double x, double t)
{
    return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

/**
 * Evaluates [d_x^deriv G(.,t) * m](x) at each target by quadrature in the
 * variable z with y = x + 2 sqrt(t) z. The z range is cut at |z| = 9 where the
 * Gaussian factor is below 1e-35.
 */
inline std::vector<double> heat_convolve(const KernelWeight& m, double t, int deriv,
                                         const std::vector<double>& x_targets, double tol = 1e-11)
{
    if (!(t > 0.0)) throw std::invalid_argument("heat_convolve: t must be positive");
    if (deriv != 0 && deriv != 1) throw std::invalid_argument("heat_convolve: deriv must be 0 or 1");
    constexpr double zmax = 9.0;
    const double st = std::sqrt(t);
    const double pref = deriv == 0 ? 1.0 / sqrt_pi : 1.0 / (sqrt_pi * st);

    std::vector<double> out(x_targets.size());
    std::vector<double> cuts;
    for (std::size_t i = 0; i < x_targets.size(); ++i) {
        const double x = x_targets[i];
        cuts.assign({-zmax, zmax});
        for (double yb : m.breakpoints) {
            const double zb = (yb - x) / (2.0 * st);
            if (zb > -zmax && zb < zmax) cuts.push_back(zb);
        }
        std::sort(cuts.begin(), cuts.end());
        auto integrand = [&](double z) {
            const double g = std::exp(-z * z) * m.value(x + 2.0 * st * z);
            return deriv == 0 ? g : z * g;
        };
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            s += adaptive_quad(integrand, cuts[k], cuts[k + 1], tol / pref);
        out[i] = pref * s;
    }
    return out;
}

inline double heat_convolve(const KernelWeight& m, double t, int deriv, double x, double tol = 1e-11)
{
    return heat_convolve(m, t, deriv, std::vector<double>{x}, tol)[0];
}

} // namespace kdvb
