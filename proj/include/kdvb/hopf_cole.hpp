#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kdvb/fft.hpp"
#include "kdvb/profiles.hpp"

namespace kdvb {

/**
 * x -> left_tail + integral of u over [-L, x]. The integral is taken spectrally:
 * mean(u) (x + L) plus the periodic primitive of u - mean(u), so differentiating
 * the result returns u to spectral accuracy.
 */
inline RealField cumulative_mass(const RealField& u, double left_tail = 0.0)
{
    if (!u.all_finite()) throw std::invalid_argument("cumulative_mass: non-finite field");
    const Grid1D& g = u.grid;
    const std::size_t n = g.size();
    std::vector<cplx> half;
    rfft(u.values, half);
    const double mean = half[0].real() / static_cast<double>(n);
    half[0] = 0.0;
    for (std::size_t j = 1; j < half.size(); ++j)
        half[j] = g.is_nyquist(j) ? cplx(0.0) : half[j] / cplx(0.0, g.wavenumber(j));
    RealField P(g);
    irfft(half, P.values, n);
    const double L = g.half_width();
    RealField out(g);
    for (std::size_t j = 0; j < n; ++j) out[j] = left_tail + mean * (g.x(j) + L) + P[j] - P[0];
    return out;
}

struct HopfColeState {
    RealField rho;
    RealField w;
    RealField w_x;
    RealField eta_inv;
    double time = 0.0;
};

/// d/dx of a field that is smooth inside the box but jumps across the periodic seam.
inline RealField seam_corrected_derivative(const RealField& f)
{
    const Grid1D& g = f.grid;
    const std::size_t n = g.size();
    const double jump = f[n - 1] - f[0];
    const double sigma = g.half_width() / 6.0;
    RealField smooth(g);
    for (std::size_t j = 0; j < n; ++j) smooth[j] = f[j] - 0.5 * jump * (1.0 + std::erf(g.x(j) / sigma));
    RealField d = spectral_derivative(smooth, 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = g.x(j) / sigma;
        d[j] += jump * std::exp(-s * s) / (sigma * sqrt_pi);
    }
    return d;
}

/// rho = exp(-(b/2) int u), w = rho - eta^{-1}; left_tail is the mass of u to the left of the box.
inline HopfColeState hopf_cole_transform(const RealField& u, const ProfileContext& ctx, double t,
                                         double left_tail = 0.0)
{
    const Grid1D& g = u.grid;
    const double b = ctx.b();
    RealField cum = cumulative_mass(u, left_tail);
    HopfColeState s;
    s.time = t;
    s.rho = RealField(g);
    s.w = RealField(g);
    s.eta_inv = RealField(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        s.rho[j] = std::exp(-0.5 * b * cum[j]);
        s.eta_inv[j] = 1.0 / eta(g.x(j), t, ctx);
        s.w[j] = s.rho[j] - s.eta_inv[j];
    }
    s.w_x = seam_corrected_derivative(s.w);
    return s;
}

/// -w chi / rho - (2/b) w_x / rho, which equals u - chi.
inline RealField reconstruct_difference(const HopfColeState& s, const ProfileContext& ctx)
{
    const Grid1D& g = s.rho.grid;
    const double b = ctx.b();
    RealField out(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double r = s.rho[j];
        if (!(r >= 1e-8)) throw std::domain_error("reconstruct_difference: rho below 1e-8, outside the small-data regime");
        out[j] = -s.w[j] * chi(g.x(j), s.time, ctx) / r - (2.0 / b) * s.w_x[j] / r;
    }
    return out;
}

} // namespace kdvb
