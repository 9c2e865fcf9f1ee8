#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kdvb/datum.hpp"
#include "kdvb/diffusion_wave.hpp"
#include "kdvb/heat.hpp"
#include "kdvb/special.hpp"

namespace kdvb {

struct ProfileContext {
    ModelParams params;
    double delta = 0.0;
    double alpha = 1.5;
    double c_plus = 0.0;
    double c_minus = 0.0;
    double c_plus_error = 0.0;
    double c_minus_error = 0.0;
    double d_const = 0.0;
    std::optional<double> beta0;
    double beta1 = 0.0;
    double chi_star_0 = 0.0;
    double eta_star_0 = 1.0;

    double b() const { return params.b; }
};

inline double beta0_value(const ModelParams& p, double alpha, double cp, double cm, double chi0)
{
    if (!(alpha < 2.0))
        throw std::domain_error("beta0 is singular at alpha = 2; use beta1 for the alpha = 2 case");
    return (cp - cm) * gamma(0.5 * (3.0 - alpha)) + (cp + cm) * p.b * chi0 / (2.0 - alpha) * gamma(2.0 - 0.5 * alpha);
}

inline double beta1_value(const ModelParams& p, double cp, double cm, double d)
{
    return 0.5 * (cp + cm) - d * p.dispersion_factor();
}

/// Builds the context and caches d, beta0 (alpha < 2), beta1, chi_star(0), eta_star(0).
inline ProfileContext make_context(const ModelParams& params, double delta, double alpha, double c_plus,
                                   double c_minus)
{
    params.validate();
    if (!(alpha > 1.0) || !(alpha <= 2.0)) throw std::invalid_argument("context: alpha must lie in (1, 2]");
    ProfileContext ctx;
    ctx.params = params;
    ctx.delta = delta;
    ctx.alpha = alpha;
    ctx.c_plus = c_plus;
    ctx.c_minus = c_minus;
    ctx.chi_star_0 = chi_star(0.0, params.b, delta);
    ctx.eta_star_0 = eta_star(0.0, params.b, delta);
    ctx.d_const = d_constant(params.b, delta);
    if (alpha < 2.0) ctx.beta0 = beta0_value(params, alpha, c_plus, c_minus, ctx.chi_star_0);
    ctx.beta1 = beta1_value(params, c_plus, c_minus, ctx.d_const);
    return ctx;
}

struct BetaConstants {
    double beta0;
    double beta1;
};

inline BetaConstants beta_constants(const ProfileContext& ctx)
{
    return {beta0_value(ctx.params, ctx.alpha, ctx.c_plus, ctx.c_minus, ctx.chi_star_0), ctx.beta1};
}

inline double chi(double x, double t, const ProfileContext& ctx) { return chi(x, t, ctx.b(), ctx.delta); }
inline double eta(double x, double t, const ProfileContext& ctx) { return eta(x, t, ctx.b(), ctx.delta); }
inline double eta_star(double x, const ProfileContext& ctx) { return eta_star(x, ctx.b(), ctx.delta); }

inline double V_profile(double x, double t, const ProfileContext& ctx)
{
    if (t < 0.0) throw std::invalid_argument("V_profile: t must be nonnegative");
    const double f = ctx.params.dispersion_factor();
    if (f == 0.0 || ctx.delta == 0.0 || t == 0.0) return 0.0;
    const double s = std::sqrt(1.0 + t);
    return -(ctx.d_const / (4.0 * sqrt_pi)) * f * V_star(x / s, ctx.b(), ctx.delta) * std::log1p(t) / (1.0 + t);
}

/// w0(x) = exp(-(b/2) int u0) - exp(-(b/2) int chi_star), both integrals over (-inf, x].
inline double w0_datum(const InitialDatum& u0, const ProfileContext& ctx, double x)
{
    const double b = ctx.b();
    return std::exp(-0.5 * b * u0.cumulative(x)) - std::exp(-0.5 * b * chi_star_cumulative(x, b, ctx.delta));
}

/// z0(x) = eta_star(x)^{-1} * integral of (u0 - chi_star) over (-inf, x].
inline double z0_datum(const InitialDatum& u0, const ProfileContext& ctx, double x)
{
    const double b = ctx.b();
    double diff;
    if (x > 0.0)
        diff = chi_star_upper_tail(x, b, ctx.delta) - u0.upper_tail(x);
    else
        diff = u0.cumulative(x) - chi_star_cumulative(x, b, ctx.delta);
    return diff / eta_star(x, b, ctx.delta);
}

struct TailLimits {
    double c_plus = 0.0;
    double c_minus = 0.0;
    double err_plus = 0.0;
    double err_minus = 0.0;
};

namespace detail {

// g(x) = c + a1/x + a2/x^2 through three abscissae; returns (three-point c, two-point c).
inline std::pair<double, double> richardson_limit(const double* x, const double* g)
{
    const double h[3] = {1.0 / x[0], 1.0 / x[1], 1.0 / x[2]};
    double l3 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double w = 1.0;
        for (int j = 0; j < 3; ++j)
            if (j != i) w *= (0.0 - h[j]) / (h[i] - h[j]);
        l3 += w * g[i];
    }
    const double l2 = (g[2] * h[1] - g[1] * h[2]) / (h[1] - h[2]);
    return {l3, l2};
}

} // namespace detail

/**
 * Estimates lim_{x->+-inf} (1+|x|)^{alpha-1} z0(x) by Richardson extrapolation of
 * samples at |x| = 0.5L, 0.7L, 0.9L. The error estimate is the gap between the
 * three-point and two-point extrapolants.
 */
inline TailLimits tail_limits(const std::function<double(double)>& z0, double alpha, double L)
{
    const double fr[3] = {0.5, 0.7, 0.9};
    TailLimits out;
    for (int side = 0; side < 2; ++side) {
        const double sgn = side == 0 ? 1.0 : -1.0;
        double xs[3], gs[3];
        for (int i = 0; i < 3; ++i) {
            xs[i] = fr[i] * L;
            gs[i] = std::pow(1.0 + xs[i], alpha - 1.0) * z0(sgn * xs[i]);
        }
        auto [l3, l2] = detail::richardson_limit(xs, gs);
        const double err = std::abs(l3 - l2);
        const double scale = std::max({std::abs(gs[0]), std::abs(gs[1]), std::abs(gs[2])});
        if (err > 0.05 * std::abs(l3) && err > 1e-9 * std::max(scale, 1.0)) {
            std::ostringstream os;
            os << "tail_limits: " << (side == 0 ? "right" : "left") << " tail does not stabilise (limit " << l3
               << ", spread " << err << "); use a larger L";
            throw std::runtime_error(os.str());
        }
        if (side == 0) {
            out.c_plus = l3;
            out.err_plus = err;
        } else {
            out.c_minus = l3;
            out.err_minus = err;
        }
    }
    return out;
}

/// Context for a concrete datum: delta from the closed-form mass, tails extrapolated at scale L.
inline ProfileContext context_for_datum(const ModelParams& params, const InitialDatum& u0, double L)
{
    const double delta = total_mass(u0);
    ProfileContext probe = make_context(params, delta, u0.alpha(), 0.0, 0.0);
    TailLimits tl = tail_limits([&](double x) { return z0_datum(u0, probe, x); }, u0.alpha(), L);
    ProfileContext ctx = make_context(params, delta, u0.alpha(), tl.c_plus, tl.c_minus);
    ctx.c_plus_error = tl.err_plus;
    ctx.c_minus_error = tl.err_minus;
    return ctx;
}

/// m(y) = c_alpha(y) (1+|y|)^{-(alpha-1)} with c_alpha = c_plus for y > 0, c_minus for y < 0.
inline KernelWeight second_profile_weight(const ProfileContext& ctx)
{
    const double cp = ctx.c_plus, cm = ctx.c_minus, a1 = ctx.alpha - 1.0;
    return {[=](double y) { return (y > 0.0 ? cp : cm) * std::pow(1.0 + std::abs(y), -a1); }, {0.0}};
}

/// Z(x,t) = eta_x (G * m) + eta (d_x G * m).
inline std::vector<double> Z_profile(const std::vector<double>& xs, double t, const ProfileContext& ctx)
{
    if (!(t > 0.0)) throw std::invalid_argument("Z_profile: t must be positive");
    std::vector<double> out(xs.size(), 0.0);
    if (ctx.c_plus == 0.0 && ctx.c_minus == 0.0) return out;
    const KernelWeight m = second_profile_weight(ctx);
    const std::vector<double> g0 = heat_convolve(m, t, 0, xs);
    const std::vector<double> g1 = heat_convolve(m, t, 1, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = eta_x(xs[i], t, ctx.b(), ctx.delta) * g0[i] + eta(xs[i], t, ctx) * g1[i];
    return out;
}

inline double Z_profile(double x, double t, const ProfileContext& ctx)
{
    return Z_profile(std::vector<double>{x}, t, ctx)[0];
}

/// Coefficient of t^{-alpha/2} in Z(0,t) as t -> infinity.
inline double Z_leading_coefficient(const ProfileContext& ctx)
{
    const double beta0 = beta0_value(ctx.params, ctx.alpha, ctx.c_plus, ctx.c_minus, ctx.chi_star_0);
    return ctx.eta_star_0 / (4.0 * sqrt_pi) * std::pow(2.0, 2.0 - ctx.alpha) * beta0;
}

} // namespace kdvb
