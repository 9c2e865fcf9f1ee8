#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kdvb/datum.hpp"
#include "kdvb/fft.hpp"
#include "kdvb/profiles.hpp"

namespace kdvb {

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fourier symbol of u_xx - k u_xxx: -xi^2 + i k xi^3 (dispersive part dropped at Nyquist).
class LinearSymbol {
public:
    LinearSymbol(const Grid1D& g, double k) : grid_(g), k_(k), values_(g.size() / 2 + 1)
    {
        for (std::size_t j = 0; j < values_.size(); ++j) {
            const double xi = g.wavenumber(j);
            const double disp = g.is_nyquist(j) ? 0.0 : k * xi * xi * xi;
            values_[j] = cplx(-xi * xi, disp);
        }
    }

    const Grid1D& grid() const { return grid_; }
    double k() const { return k_; }
    std::size_t size() const { return values_.size(); }
    cplx operator[](std::size_t j) const { return values_[j]; }

    std::vector<cplx> multiplier(double t) const
    {
        std::vector<cplx> m(values_.size());
        for (std::size_t j = 0; j < m.size(); ++j) m[j] = std::exp(t * values_[j]);
        return m;
    }

private:
    Grid1D grid_;
    double k_;
    std::vector<cplx> values_;
};

/// Exact linear propagator exp(t(d_xx - k d_xxx)) applied in spectral space.
inline RealField apply_semigroup(const RealField& f, double t, double k)
{
    if (t < 0.0) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
    if (t == 0.0) return f;
    LinearSymbol sym(f.grid, k);
    std::vector<cplx> half;
    rfft(f.values, half);
    const auto m = sym.multiplier(t);
    for (std::size_t j = 0; j < half.size(); ++j) half[j] *= m[j];
    RealField out(f.grid);
    irfft(half, out.values, f.size());
    return out;
}

inline RealField flux(const RealField& u, const ModelParams& p)
{
    RealField out(u.grid);
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = p.flux(u[j]);
    return out;
}

/// Largest retained mode index under the two-thirds rule.
inline std::size_t dealias_cutoff(std::size_t n) { return n / 3; }

inline void dealias(std::vector<cplx>& half, std::size_t n)
{
    for (std::size_t j = dealias_cutoff(n) + 1; j < half.size(); ++j) half[j] = 0.0;
}

inline double default_time_step(const Grid1D& g, double k)
{
    return std::min(0.25, 0.5 * std::pow(g.dx(), 2.0 / 3.0) / std::cbrt(std::max(1.0, std::abs(k))));
}

/// ETDRK4 weights for step h; phi functions are averaged over a circle around h*L.
struct EtdCoefficients {
    double h = 0.0;
    std::vector<cplx> E, E2, Q, f1, f2, f3;

    EtdCoefficients() = default;
    EtdCoefficients(const LinearSymbol& sym, double step, int contour_points = 64) : h(step)
    {
        const std::size_t m = sym.size();
        E.resize(m), E2.resize(m), Q.resize(m), f1.resize(m), f2.resize(m), f3.resize(m);
        std::vector<cplx> roots(contour_points);
        for (int p = 0; p < contour_points; ++p)
            roots[p] = std::polar(1.0, 2.0 * std::numbers::pi * (p + 0.5) / contour_points);
        const double inv = 1.0 / contour_points;
        for (std::size_t j = 0; j < m; ++j) {
            const cplx hl = h * sym[j];
            E[j] = std::exp(hl);
            E2[j] = std::exp(0.5 * hl);
            cplx q = 0.0, a = 0.0, b = 0.0, c = 0.0;
            for (const cplx& rt : roots) {
                const cplx r = hl + rt;
                const cplx er = std::exp(r);
                const cplx r3 = r * r * r;
                q += (std::exp(0.5 * r) - 1.0) / r;
                a += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
                b += (2.0 + r + er * (r - 2.0)) / r3;
                c += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
            }
            Q[j] = h * q * inv;
            f1[j] = h * a * inv;
            f2[j] = h * b * inv;
            f3[j] = h * c * inv;
        }
    }
};

/// Nonlinear term on the half spectrum: out = N(v_hat, t).
using NonlinearTerm = std::function<void(const std::vector<cplx>&, double, std::vector<cplx>&)>;

/// One ETDRK4 step (Cox-Matthews stages) on the half spectrum.
inline void etdrk4_step(std::vector<cplx>& v, double t, const EtdCoefficients& co, const NonlinearTerm& N)
{
    const std::size_t m = v.size();
    thread_local std::vector<cplx> Nv, Na, Nb, Nc, a, b, c;
    Nv.resize(m), Na.resize(m), Nb.resize(m), Nc.resize(m), a.resize(m), b.resize(m), c.resize(m);
    const double h = co.h;
    N(v, t, Nv);
    for (std::size_t j = 0; j < m; ++j) a[j] = co.E2[j] * v[j] + co.Q[j] * Nv[j];
    N(a, t + 0.5 * h, Na);
    for (std::size_t j = 0; j < m; ++j) b[j] = co.E2[j] * v[j] + co.Q[j] * Na[j];
    N(b, t + 0.5 * h, Nb);
    for (std::size_t j = 0; j < m; ++j) c[j] = co.E2[j] * a[j] + co.Q[j] * (2.0 * Nb[j] - Nv[j]);
    N(c, t + h, Nc);
    for (std::size_t j = 0; j < m; ++j)
        v[j] = co.E[j] * v[j] + Nv[j] * co.f1[j] + 2.0 * (Na[j] + Nb[j]) * co.f2[j] + Nc[j] * co.f3[j];
}

/// -i xi F[f(u)] with the two-thirds rule applied before and after the product.
inline NonlinearTerm kdvb_nonlinearity(const Grid1D& g, const ModelParams& p)
{
    const std::size_t n = g.size();
    std::vector<cplx> dsym(n / 2 + 1);
    for (std::size_t j = 0; j < dsym.size(); ++j) dsym[j] = -derivative_symbol(g, j, 1);
    return [n, p, dsym](const std::vector<cplx>& v, double, std::vector<cplx>& out) {
        thread_local std::vector<cplx> tmp;
        thread_local std::vector<double> u;
        tmp = v;
        dealias(tmp, n);
        irfft(tmp, u, n);
        for (double& x : u) x = p.flux(x);
        rfft(u, out);
        dealias(out, n);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] *= dsym[j];
    };
}

struct Diagnostics {
    double t = 0.0;
    double mass = 0.0;
    double sup_norm = 0.0;
    double l2_norm = 0.0;
    double boundary_norm = 0.0;
};

inline Diagnostics diagnose(const RealField& u, double t)
{
    return {t, integral(u), sup_norm(u), l2_norm(u), outer_sup(u, 0.9)};
}

struct EvolutionState {
    double time = 0.0;
    RealField field;
    double dt = 0.0;
    Diagnostics diagnostics;
};

struct EvolveOptions {
    double dt = 0.0;                 // 0 selects default_time_step
    bool allow_doubling = true;
    double doubling_threshold = 0.01;
    int contour_points = 64;
    std::size_t history_stride = 1;  // record diagnostics every this many steps
};

struct EvolveResult {
    std::vector<EvolutionState> snapshots;
    std::vector<Diagnostics> history;
};

namespace detail {

inline void check_times(const std::vector<double>& ts)
{
    if (ts.empty()) throw std::invalid_argument("evolve: no snapshot times");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] >= 0.0) || !std::isfinite(ts[i])) throw std::invalid_argument("evolve: snapshot times must be finite and >= 0");
        if (i > 0 && !(ts[i] > ts[i - 1])) throw std::invalid_argument("evolve: snapshot times must increase");
    }
}

/// Drives etdrk4_step from t = 0 across the snapshot times, landing on each exactly.
inline EvolveResult integrate(std::vector<cplx> v, const Grid1D& g, const LinearSymbol& sym, const NonlinearTerm& N,
                              const std::vector<double>& times, const EvolveOptions& opt, bool may_double)
{
    check_times(times);
    const std::size_t n = g.size();
    double dt = opt.dt > 0.0 ? opt.dt : default_time_step(g, sym.k());
    bool doubled = false;
    EvolveResult res;
    RealField u(g);
    auto physical = [&](double t) {
        irfft(v, u.values, n);
        if (!u.all_finite()) {
            std::ostringstream os;
            os << "evolve: non-finite field at t=" << t << " (step " << dt << "); reduce the step or the amplitude";
            throw NumericalFailure(os.str());
        }
        return diagnose(u, t);
    };
    Diagnostics d = physical(0.0);
    res.history.push_back(d);
    double t = 0.0;
    std::size_t step_count = 0;
    EtdCoefficients co;
    for (double target : times) {
        while (t < target) {
            const double remaining = target - t;
            const auto nsteps = static_cast<std::size_t>(std::ceil(remaining / dt - 1e-9));
            const double h = remaining / static_cast<double>(std::max<std::size_t>(nsteps, 1));
            if (co.h != h) co = EtdCoefficients(sym, h, opt.contour_points);
            bool changed = false;
            for (std::size_t s = 0; s < nsteps; ++s) {
                etdrk4_step(v, t, co, N);
                t = (s + 1 == nsteps) ? target : t + h;
                ++step_count;
                d = physical(t);
                if (step_count % opt.history_stride == 0 || t == target) res.history.push_back(d);
                if (may_double && !doubled && d.sup_norm < opt.doubling_threshold) {
                    doubled = true;
                    dt *= 2.0;
                    if (s + 1 < nsteps) {
                        changed = true;
                        break;
                    }
                }
            }
            if (!changed) t = target;
        }
        irfft(v, u.values, n);
        res.snapshots.push_back({target, u, co.h > 0.0 ? co.h : dt, diagnose(u, target)});
    }
    return res;
}

} // namespace detail

/// Solves u_t + f(u)_x + k u_xxx = u_xx on the periodic grid of u0.
inline EvolveResult evolve(const RealField& u0, const ModelParams& p, const std::vector<double>& snapshot_times,
                           const EvolveOptions& opt = {})
{
    p.validate();
    if (!u0.all_finite()) throw std::invalid_argument("evolve: initial field is not finite");
    std::vector<cplx> v;
    rfft(u0.values, v);
    LinearSymbol sym(u0.grid, p.k);
    return detail::integrate(std::move(v), u0.grid, sym, kdvb_nonlinearity(u0.grid, p), snapshot_times, opt,
                             opt.allow_doubling);
}

inline EvolveResult evolve(const InitialDatum& u0, const Grid1D& g, const ModelParams& p,
                           const std::vector<double>& snapshot_times, const EvolveOptions& opt = {})
{
    return evolve(u0.sample(g), p, snapshot_times, opt);
}

/**
 * Solves v_t + (b chi v)_x - v_xx = -((c/3) chi^3)_x - k chi_xxx with v(0) = 0, where
 * chi is the diffusion wave of ctx. The linear part is the heat operator only.
 */
inline EvolveResult evolve_forced_linear(const Grid1D& g, const ProfileContext& ctx,
                                         const std::vector<double>& snapshot_times, EvolveOptions opt = {})
{
    const ModelParams p = ctx.params;
    const std::size_t n = g.size();
    if (opt.dt <= 0.0) opt.dt = default_time_step(g, p.k);
    LinearSymbol heat(g, 0.0);
    std::vector<cplx> d1(n / 2 + 1), d3(n / 2 + 1);
    for (std::size_t j = 0; j < d1.size(); ++j) {
        d1[j] = derivative_symbol(g, j, 1);
        d3[j] = derivative_symbol(g, j, 3);
    }
    const double b = p.b, c3 = p.c / 3.0, k = p.k, delta = ctx.delta;
    const std::vector<double> xs = g.points();
    NonlinearTerm N = [=](const std::vector<cplx>& v, double t, std::vector<cplx>& out) {
        thread_local std::vector<cplx> tmp, chat;
        thread_local std::vector<double> w, ch;
        tmp = v;
        dealias(tmp, n);
        irfft(tmp, w, n);
        ch.resize(n);
        for (std::size_t j = 0; j < n; ++j) ch[j] = chi(xs[j], t, b, delta);
        for (std::size_t j = 0; j < n; ++j) w[j] = b * ch[j] * w[j] + c3 * ch[j] * ch[j] * ch[j];
        rfft(w, out);
        dealias(out, n);
        rfft(ch, chat);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = -d1[j] * out[j] - k * d3[j] * chat[j];
    };
    return detail::integrate(std::vector<cplx>(n / 2 + 1, 0.0), g, heat, N, snapshot_times, opt, false);
}

} // namespace kdvb
