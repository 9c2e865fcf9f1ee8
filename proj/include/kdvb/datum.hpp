#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "kdvb/diffusion_wave.hpp"
#include "kdvb/grid.hpp"

namespace kdvb {

/// Smooth cutoff: 1 for |x| <= start*L, 0 for |x| >= stop*L.
struct Window {
    double start = 0.9;
    double stop = 0.98;
    bool enabled = true;

    double operator()(double x, double L) const
    {
        if (!enabled) return 1.0;
        const double s = (std::abs(x) - start * L) / ((stop - start) * L);
        if (s <= 0.0) return 1.0;
        if (s >= 1.0) return 0.0;
        auto h = [](double r) { return r > 0.0 ? std::exp(-1.0 / r) : 0.0; };
        return h(1.0 - s) / (h(1.0 - s) + h(s));
    }
};

enum class DatumFamily { zero, algebraic, gaussian, diffusion_wave, samples };

inline std::string to_string(DatumFamily f)
{
    switch (f) {
    case DatumFamily::zero: return "zero";
    case DatumFamily::algebraic: return "algebraic";
    case DatumFamily::gaussian: return "gaussian";
    case DatumFamily::diffusion_wave: return "diffusion_wave";
    case DatumFamily::samples: return "samples";
    }
    return "unknown";
}

/**
 * Initial data u0 with closed-form mass and cumulative integrals.
 *
 * algebraic:       A (1+x^2)^{-alpha/2} (1 + eps x (1+x^2)^{-1/2})
 * gaussian:        A exp(-x^2/4)
 * diffusion_wave:  chi_star(x; b, delta)
 * samples:         values on a grid, zero outside it
 */
class InitialDatum {
public:
    static InitialDatum zero(double alpha = 1.5)
    {
        InitialDatum d;
        d.family_ = DatumFamily::zero;
        d.alpha_ = check_alpha(alpha);
        return d;
    }
    static InitialDatum algebraic(double A, double alpha, double eps = 0.0)
    {
        InitialDatum d;
        d.family_ = DatumFamily::algebraic;
        d.A_ = A;
        d.alpha_ = check_alpha(alpha);
        d.eps_ = eps;
        if (std::abs(eps) > 1.0) throw std::invalid_argument("algebraic datum: |eps| must be <= 1");
        return d;
    }
    static InitialDatum gaussian(double A, double alpha = 2.0)
    {
        InitialDatum d;
        d.family_ = DatumFamily::gaussian;
        d.A_ = A;
        d.alpha_ = check_alpha(alpha);
        return d;
    }
    static InitialDatum diffusion_wave(double b, double delta, double alpha = 2.0)
    {
        InitialDatum d;
        d.family_ = DatumFamily::diffusion_wave;
        d.wave_b_ = b;
        d.wave_delta_ = delta;
        d.alpha_ = check_alpha(alpha);
        return d;
    }
    static InitialDatum samples(const RealField& f, double alpha)
    {
        if (!f.all_finite()) throw std::invalid_argument("sampled datum: non-finite values");
        InitialDatum d;
        d.family_ = DatumFamily::samples;
        d.samples_ = f;
        d.alpha_ = check_alpha(alpha);
        d.window_.enabled = false;
        return d;
    }

    DatumFamily family() const { return family_; }
    double amplitude() const { return A_; }
    double alpha() const { return alpha_; }
    double epsilon() const { return eps_; }
    const Window& window() const { return window_; }
    void set_window(const Window& w) { window_ = w; }

    double value(double x) const
    {
        switch (family_) {
        case DatumFamily::zero: return 0.0;
        case DatumFamily::algebraic: {
            const double q = 1.0 + x * x;
            return A_ * std::pow(q, -0.5 * alpha_) * (1.0 + eps_ * x / std::sqrt(q));
        }
        case DatumFamily::gaussian: return A_ * std::exp(-0.25 * x * x);
        case DatumFamily::diffusion_wave: return chi_star(x, wave_b_, wave_delta_);
        case DatumFamily::samples: return interpolate(x);
        }
        return 0.0;
    }

    /// Integral of u0 over (-inf, x].
    double cumulative(double x) const
    {
        switch (family_) {
        case DatumFamily::zero: return 0.0;
        case DatumFamily::algebraic: {
            const double even = x <= 0.0 ? A_ * even_tail(-x) : A_ * (full_beta() - even_tail(x));
            return even - A_ * eps_ * odd_primitive(x);
        }
        case DatumFamily::gaussian: return 2.0 * A_ * gauss_tail(-0.5 * x);
        case DatumFamily::diffusion_wave: return chi_star_cumulative(x, wave_b_, wave_delta_);
        case DatumFamily::samples: return sampled_cumulative(x);
        }
        return 0.0;
    }

    /// Integral of u0 over [x, inf).
    double upper_tail(double x) const
    {
        switch (family_) {
        case DatumFamily::algebraic:
            if (x >= 0.0) return A_ * even_tail(x) + A_ * eps_ * odd_primitive(x);
            return mass() - cumulative(x);
        case DatumFamily::gaussian: return 2.0 * A_ * gauss_tail(0.5 * x);
        case DatumFamily::diffusion_wave: return chi_star_upper_tail(x, wave_b_, wave_delta_);
        default: return mass() - cumulative(x);
        }
    }

    double mass() const
    {
        switch (family_) {
        case DatumFamily::zero: return 0.0;
        case DatumFamily::algebraic: return A_ * full_beta();
        case DatumFamily::gaussian: return 2.0 * A_ * sqrt_pi;
        case DatumFamily::diffusion_wave: return wave_delta_;
        case DatumFamily::samples: return integral(samples_);
        }
        return 0.0;
    }

    /// C with |u0(x)| <= C (1+|x|)^{-alpha}.
    double bound_constant() const
    {
        auto gauss_sup = [&] {
            const double xm = 0.5 * (-1.0 + std::sqrt(1.0 + 8.0 * alpha_));
            return std::pow(1.0 + xm, alpha_) * std::exp(-0.25 * xm * xm);
        };
        switch (family_) {
        case DatumFamily::zero: return 0.0;
        case DatumFamily::algebraic: return std::abs(A_) * (1.0 + std::abs(eps_)) * std::pow(2.0, 0.5 * alpha_);
        case DatumFamily::gaussian: return std::abs(A_) * gauss_sup();
        case DatumFamily::diffusion_wave: {
            const double th = std::expm1(0.5 * wave_b_ * wave_delta_);
            return std::abs(th / wave_b_) / (sqrt_pi * (1.0 + std::min(th, 0.0))) * gauss_sup();
        }
        case DatumFamily::samples: {
            double C = 0.0;
            for (std::size_t j = 0; j < samples_.size(); ++j)
                C = std::max(C, std::abs(samples_[j]) * std::pow(1.0 + std::abs(samples_.grid.x(j)), alpha_));
            return C;
        }
        }
        return 0.0;
    }

    /// Samples on g, multiplied by the window when it is enabled.
    RealField sample(const Grid1D& g) const
    {
        if (family_ == DatumFamily::samples) {
            if (!(samples_.grid == g)) throw std::invalid_argument("sampled datum: grid mismatch");
            return samples_;
        }
        const double L = g.half_width();
        return RealField::sample(g, [&](double x) { return value(x) * window_(x, L); });
    }

private:
    static double check_alpha(double alpha)
    {
        if (!(alpha > 1.0) || !(alpha <= 2.0))
            throw std::invalid_argument("datum: alpha must lie in (1, 2], got " + std::to_string(alpha));
        return alpha;
    }

    double full_beta() const { return boost::math::beta(0.5 * (alpha_ - 1.0), 0.5); }

    // integral of (1+y^2)^{-alpha/2} over [a, inf), a >= 0
    double even_tail(double a) const
    {
        return 0.5 * boost::math::beta(0.5 * (alpha_ - 1.0), 0.5, 1.0 / (1.0 + a * a));
    }

    // primitive of x (1+x^2)^{-(alpha+1)/2} vanishing at -inf, sign flipped
    double odd_primitive(double x) const
    {
        return std::pow(1.0 + x * x, -0.5 * (alpha_ - 1.0)) / (alpha_ - 1.0);
    }

    double interpolate(double x) const
    {
        const Grid1D& g = samples_.grid;
        const double L = g.half_width();
        if (x < -L || x >= L) return 0.0;
        const double s = (x + L) / g.dx();
        const std::size_t j = static_cast<std::size_t>(s);
        const double f = s - static_cast<double>(j);
        const double right = j + 1 < g.size() ? samples_[j + 1] : 0.0;
        return (1.0 - f) * samples_[j] + f * right;
    }

    double sampled_cumulative(double x) const
    {
        const Grid1D& g = samples_.grid;
        const double L = g.half_width();
        if (x <= -L) return 0.0;
        const double dx = g.dx();
        double s = 0.0;
        std::size_t j = 0;
        for (; j + 1 < g.size() && g.x(j + 1) <= x; ++j) s += 0.5 * dx * (samples_[j] + samples_[j + 1]);
        const double xr = std::min(x, g.x(j) + dx);
        const double h = xr - g.x(j);
        return s + 0.5 * h * (samples_[j] + interpolate(xr));
    }

    DatumFamily family_ = DatumFamily::zero;
    double A_ = 0.0;
    double alpha_ = 1.5;
    double eps_ = 0.0;
    double wave_b_ = 1.0;
    double wave_delta_ = 0.0;
    RealField samples_;
    Window window_;
};

/// delta = integral of u0 over R.
inline double total_mass(const InitialDatum& u0) { return u0.mass(); }

} // namespace kdvb
