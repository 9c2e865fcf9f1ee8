#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kdvb/grid.hpp"

namespace kdvb {

using cplx = std::complex<double>;

namespace detail {

struct RealPlans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

// Plans are created once per size under a lock; execution goes through the
// new-array interface, which FFTW documents as thread safe.
inline const RealPlans& plans_for(std::size_t n)
{
    static std::mutex mtx;
    static std::map<std::size_t, RealPlans> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const int ni = static_cast<int>(n);
    double* rbuf = fftw_alloc_real(n);
    fftw_complex* cbuf = fftw_alloc_complex(n / 2 + 1);
    RealPlans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.r2c = fftw_plan_dft_r2c_1d(ni, rbuf, cbuf, flags);
    p.c2r = fftw_plan_dft_c2r_1d(ni, cbuf, rbuf, flags);
    fftw_free(rbuf);
    fftw_free(cbuf);
    if (!p.r2c || !p.c2r) throw std::runtime_error("fft: plan creation failed");
    return cache.emplace(n, p).first->second;
}

} // namespace detail

/// Unnormalised DFT of real samples, modes 0..n/2.
inline void rfft(const std::vector<double>& in, std::vector<cplx>& out)
{
    const std::size_t n = in.size();
    out.resize(n / 2 + 1);
    fftw_execute_dft_r2c(detail::plans_for(n).r2c, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

/// Inverse of rfft including the 1/n factor. The input is left untouched.
inline void irfft(const std::vector<cplx>& in, std::vector<double>& out, std::size_t n)
{
    if (in.size() != n / 2 + 1) throw std::invalid_argument("irfft: half spectrum has wrong length");
    thread_local std::vector<cplx> scratch;
    scratch = in;
    out.resize(n);
    fftw_execute_dft_c2r(detail::plans_for(n).c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= inv;
}

/**
 * Spectral coefficients c(xi_m) = dx/sqrt(2 pi) * sum_j f_j exp(-i xi_m x_j), which
 * approximate the continuous transform (2 pi)^{-1/2} * integral of exp(-i x xi) f(x).
 * Slots follow FFT ordering (see Grid1D::mode).
 */
inline SpectralCoeffs forward_transform(const RealField& f)
{
    if (!f.all_finite()) throw std::invalid_argument("forward_transform: non-finite sample in input");
    const Grid1D& g = f.grid;
    const std::size_t n = g.size();
    std::vector<cplx> half;
    rfft(f.values, half);
    const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
    SpectralCoeffs out{g, std::vector<cplx>(n)};
    for (std::size_t j = 0; j <= n / 2; ++j) {
        const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
        out.coeffs[j] = sgn * scale * half[j];
    }
    for (std::size_t j = n / 2 + 1; j < n; ++j) out.coeffs[j] = std::conj(out.coeffs[n - j]);
    return out;
}

/// Inverse of forward_transform; returns the real part of the synthesis.
inline RealField inverse_transform(const SpectralCoeffs& c)
{
    const Grid1D& g = c.grid;
    const std::size_t n = g.size();
    if (c.coeffs.size() != n) throw std::invalid_argument("inverse_transform: coefficient count mismatch");
    const double scale = std::sqrt(2.0 * std::numbers::pi) / g.dx();
    std::vector<cplx> half(n / 2 + 1);
    for (std::size_t j = 0; j <= n / 2; ++j) {
        const cplx partner = std::conj(c.coeffs[(n - j) % n]);
        const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
        half[j] = sgn * scale * 0.5 * (c.coeffs[j] + partner);
    }
    RealField out(g);
    irfft(half, out.values, n);
    return out;
}

/// (i xi)^order on the half spectrum; odd orders vanish at Nyquist.
inline cplx derivative_symbol(const Grid1D& g, std::size_t j, int order)
{
    if (order == 0) return 1.0;
    const double xi = g.wavenumber(j);
    if (g.is_nyquist(j) && order % 2 == 1) return 0.0;
    cplx s = 1.0;
    for (int i = 0; i < order; ++i) s *= cplx(0.0, xi);
    return s;
}

inline RealField spectral_derivative(const RealField& f, int order)
{
    if (order < 0 || order > 3)
        throw std::invalid_argument("spectral_derivative: order must be in [0, 3]");
    if (order == 0) return f;
    const std::size_t n = f.size();
    std::vector<cplx> half;
    rfft(f.values, half);
    for (std::size_t j = 0; j <= n / 2; ++j) half[j] *= derivative_symbol(f.grid, j, order);
    RealField out(f.grid);
    irfft(half, out.values, n);
    return out;
}

} // namespace kdvb
