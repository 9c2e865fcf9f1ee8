#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kdvb/hopf_cole.hpp"
#include "kdvb/rates.hpp"
#include "kdvb/solver.hpp"

namespace kdvb {

enum class Verdict { pass, fail, inconclusive, skipped };

inline std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::skipped: return "skipped";
    }
    return "?";
}

struct CriterionResult {
    std::string id;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double target = std::numeric_limits<double>::quiet_NaN();
    double tolerance = std::numeric_limits<double>::quiet_NaN();
    Verdict verdict = Verdict::fail;
    std::string note;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<RateSeries> series;
    std::vector<CriterionResult> results;
    std::vector<std::string> notes;
    bool inconclusive = false;

    void add(CriterionResult r)
    {
        if (inconclusive && r.verdict == Verdict::fail) r.verdict = Verdict::inconclusive;
        results.push_back(std::move(r));
    }

    const CriterionResult* find(const std::string& id) const
    {
        for (const auto& r : results)
            if (r.id == id) return &r;
        return nullptr;
    }

    const RateSeries* find_series(const std::string& name) const
    {
        for (const auto& s : series)
            if (s.name == name) return &s;
        return nullptr;
    }

    bool all_passed() const
    {
        return std::all_of(results.begin(), results.end(),
                           [](const CriterionResult& r) { return r.verdict == Verdict::pass || r.verdict == Verdict::skipped; });
    }
};

/// Pass iff |measured - target| <= tolerance.
inline CriterionResult band_check(std::string id, double measured, double target, double tolerance, std::string note = {})
{
    const bool ok = std::isfinite(measured) && std::abs(measured - target) <= tolerance;
    return {std::move(id), measured, target, tolerance, ok ? Verdict::pass : Verdict::fail, std::move(note)};
}

/// Pass iff measured <= bound (tolerance column carries the bound).
inline CriterionResult upper_check(std::string id, double measured, double bound, std::string note = {})
{
    const bool ok = std::isfinite(measured) && measured <= bound;
    return {std::move(id), measured, bound, 0.0, ok ? Verdict::pass : Verdict::fail, std::move(note)};
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

/**
 * {0, 1, 2, 4, ...} up to t_max, the decades {1, 10, 100, 1000} below t_max, t_max
 * itself, and `dense` log-uniform points across the final decade [t_max/10, t_max].
 */
inline std::vector<double> snapshot_schedule(double t_max, int dense = 16)
{
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("snapshot_schedule: t_max must be positive");
    std::vector<double> ts{0.0};
    for (double t = 1.0; t <= t_max; t *= 2.0) ts.push_back(t);
    for (double t : {1.0, 10.0, 100.0, 1000.0})
        if (t <= t_max) ts.push_back(t);
    ts.push_back(t_max);
    const double lo = t_max / 10.0;
    for (int i = 0; i < dense; ++i) ts.push_back(lo * std::pow(10.0, static_cast<double>(i) / (dense - 1)));
    std::sort(ts.begin(), ts.end());
    std::vector<double> out;
    for (double t : ts)
        if (out.empty() || t > out.back() * (1.0 + 1e-9) + 1e-12) out.push_back(t);
    out.back() = t_max;
    return out;
}

struct GuardResult {
    bool valid = true;
    double worst_time = 0.0;
    double worst_ratio = 0.0;  // boundary_norm / allowed
};

/// Invalid iff boundary_norm > max(1e-6 sup_norm, 2 boundary_norm(t=0)) at some recorded step.
inline GuardResult boundary_guard(const std::vector<Diagnostics>& history)
{
    GuardResult g;
    if (history.empty()) return g;
    const double b0 = history.front().boundary_norm;
    for (const auto& d : history) {
        const double allowed = std::max(1e-6 * d.sup_norm, 2.0 * b0);
        const double r = allowed > 0.0 ? d.boundary_norm / allowed : (d.boundary_norm > 0.0 ? 2.0 : 0.0);
        if (r > g.worst_ratio) {
            g.worst_ratio = r;
            g.worst_time = d.t;
        }
        if (r > 1.0) g.valid = false;
    }
    return g;
}

using FieldEvaluator = std::function<RealField(const EvolutionState&)>;

/// sup over the interior 80% of |u - ref| for each snapshot.
inline RateSeries sup_diff_series(const std::vector<EvolutionState>& snaps, const FieldEvaluator& ref,
                                  std::string name = "sup_diff", double frac = 0.8)
{
    if (snaps.empty()) throw std::invalid_argument("sup_diff_series: no snapshots");
    RateSeries s;
    s.name = std::move(name);
    for (const auto& st : snaps) {
        RealField r = ref(st);
        if (r.size() != st.field.size() || r.grid.half_width() != st.field.grid.half_width())
            throw std::invalid_argument("sup_diff_series: reference is on a different grid");
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = st.field[j] - r[j];
        s.push(st.time, interior_sup(r, frac));
    }
    return s;
}

inline RealField chi_field(const Grid1D& g, double t, const ProfileContext& ctx)
{
    return RealField::sample(g, [&](double x) { return chi(x, t, ctx); });
}

inline RealField V_field(const Grid1D& g, double t, const ProfileContext& ctx)
{
    return RealField::sample(g, [&](double x) { return V_profile(x, t, ctx); });
}

/// Z on the grid points with |x| <= frac L; zero outside (only interior sups are taken).
inline RealField Z_field(const Grid1D& g, double t, const ProfileContext& ctx, double frac = 0.8)
{
    std::vector<double> xs;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(g.x(j)) <= frac * g.half_width()) {
            xs.push_back(g.x(j));
            idx.push_back(j);
        }
    const std::vector<double> z = Z_profile(xs, t, ctx);
    RealField out(g);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = z[i];
    return out;
}

/**
 * U[h](x,t,tau) = int d_x(G(x-y,t-tau) eta(x,t)) eta(y,tau)^{-1} H(y) dy, where H is the
 * cumulative integral of h. Breakpoints mark where H is not smooth.
 */
inline std::vector<double> U_operator(const std::function<double(double)>& H, double t, double tau,
                                      const ProfileContext& ctx, const std::vector<double>& xs,
                                      std::vector<double> breakpoints = {0.0}, double tol = 1e-9)
{
    if (!(tau >= 0.0) || !(tau < t)) throw std::invalid_argument("U_operator: need 0 <= tau < t");
    const double b = ctx.b(), delta = ctx.delta;
    KernelWeight m{[=](double y) { return H(y) / eta(y, tau, b, delta); }, std::move(breakpoints)};
    const std::vector<double> g0 = heat_convolve(m, t - tau, 0, xs, tol);
    const std::vector<double> g1 = heat_convolve(m, t - tau, 1, xs, tol);
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = eta_x(xs[i], t, b, delta) * g0[i] + eta(xs[i], t, b, delta) * g1[i];
    return out;
}

/// Mass of u0 - (windowed u0) on x < 0: the part of the integral from -infinity the box cannot see.
inline double left_tail_deficit(const InitialDatum& u0, double L)
{
    if (u0.family() == DatumFamily::samples || u0.family() == DatumFamily::zero || !u0.window().enabled) return 0.0;
    const Window w = u0.window();
    return u0.cumulative(-w.start * L) -
           adaptive_quad([&](double x) { return u0.value(x) * w(x, L); }, -L, -w.start * L, 1e-13);
}

struct Tolerances {
    double slope = 0.1;
    double r_squared = 0.98;
    double log_variation = 0.25;
    double decay_ratio = 0.5;
    double reconstruction = 1e-6;
    double mass = 1e-8;
};

struct ExperimentConfig {
    ModelParams params{1.0, 0.0, 1.0};
    InitialDatum datum = InitialDatum::algebraic(0.1, 1.5, 0.0);
    double L = 400.0;
    std::size_t n = 8192;
    double t_max = 1000.0;
    std::vector<double> times;  // empty: snapshot_schedule(t_max)
    EvolveOptions evolve;
    double rate_t0 = 100.0;
    double rate_t1 = 0.0;  // 0: t_max
    unsigned workers = 1;
    Tolerances tol;

    std::vector<double> schedule() const { return times.empty() ? snapshot_schedule(t_max) : times; }
    double fit_end() const { return rate_t1 > 0.0 ? rate_t1 : t_max; }
};

struct RunBundle {
    Grid1D grid;
    ProfileContext ctx;
    EvolveResult run;
    double initial_mass = 0.0;
    double left_tail = 0.0;
    GuardResult guard;
    double dt = 0.0;
};

/// Samples the datum, evolves it, and builds the profile context from the full datum.
inline RunBundle execute_run(const ExperimentConfig& cfg)
{
    Grid1D g(cfg.L, cfg.n);
    cfg.params.validate();
    ProfileContext ctx = cfg.datum.family() == DatumFamily::samples
                             ? make_context(cfg.params, cfg.datum.mass(), cfg.datum.alpha(), 0.0, 0.0)
                             : context_for_datum(cfg.params, cfg.datum, cfg.L);
    RealField u0 = cfg.datum.sample(g);
    EvolveResult res = evolve(u0, cfg.params, cfg.schedule(), cfg.evolve);
    RunBundle b{g, ctx, std::move(res), integral(u0), left_tail_deficit(cfg.datum, cfg.L), {}, 0.0};
    b.guard = boundary_guard(b.run.history);
    b.dt = cfg.evolve.dt > 0.0 ? cfg.evolve.dt : default_time_step(g, cfg.params.k);
    return b;
}

namespace detail {

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline void add_provenance(ExperimentReport& rep, const ExperimentConfig& cfg, const RunBundle& b)
{
    const Window& w = cfg.datum.window();
    rep.provenance = {{"grid.L", fmt(b.grid.half_width())},
                      {"grid.n", std::to_string(b.grid.size())},
                      {"grid.dx", fmt(b.grid.dx())},
                      {"time.dt_initial", fmt(b.dt)},
                      {"time.steps", std::to_string(b.run.history.size() - 1)},
                      {"window.enabled", w.enabled ? "true" : "false"},
                      {"window.start", fmt(w.start)},
                      {"window.stop", fmt(w.stop)},
                      {"delta.full", fmt(b.ctx.delta)},
                      {"delta.windowed", fmt(b.initial_mass)},
                      {"tails.c_plus", fmt(b.ctx.c_plus)},
                      {"tails.c_plus_error", fmt(b.ctx.c_plus_error)},
                      {"tails.c_minus", fmt(b.ctx.c_minus)},
                      {"tails.c_minus_error", fmt(b.ctx.c_minus_error)},
                      {"hopf_cole.left_tail", fmt(b.left_tail)},
                      {"guard.valid", b.guard.valid ? "true" : "false"},
                      {"guard.worst_ratio", fmt(b.guard.worst_ratio)},
                      {"guard.worst_time", fmt(b.guard.worst_time)}};
}

inline bool all_tiny(const RateSeries& s)
{
    return std::all_of(s.values.begin(), s.values.end(), [](double v) { return v < 1e-300; });
}

inline CriterionResult mass_check(const RunBundle& b, double tol)
{
    const double m0 = b.initial_mass;
    const double drift = std::abs(b.run.snapshots.back().diagnostics.mass - m0);
    const bool zero = std::abs(m0) < 1e-12;
    return upper_check("C5.mass", zero ? drift : drift / std::abs(m0), tol,
                       zero ? "absolute drift of the integral of u (zero mass)" : "relative drift of the integral of u");
}

inline void mark_guard(ExperimentReport& rep, const RunBundle& b)
{
    if (!b.guard.valid) {
        rep.inconclusive = true;
        rep.notes.push_back("boundary guard tripped at t=" + fmt(b.guard.worst_time) +
                            "; rate verdicts are inconclusive, enlarge L");
    }
}

// Fits `s` restricted to [t0, t1] with the power model and checks slope and R^2.
inline void slope_checks(ExperimentReport& rep, const RateSeries& s, double t0, double t1, double target,
                         const std::string& id, const Tolerances& tol)
{
    RateSeries w = restrict_times(s, t0, t1);
    w.name = s.name + "_fit";
    try {
        apply_fit(w, RateModel::power);
    } catch (const std::exception& e) {
        rep.add({id + ".slope", std::numeric_limits<double>::quiet_NaN(), target, tol.slope, Verdict::inconclusive,
                 e.what()});
        return;
    }
    rep.add(band_check(id + ".slope", w.exponent, target, tol.slope, "fit on [" + fmt(t0) + ", " + fmt(t1) + "]"));
    CriterionResult r2{id + ".r2", w.r_squared, tol.r_squared, 0.0,
                       w.r_squared >= tol.r_squared ? Verdict::pass : Verdict::fail, "R^2 lower bound"};
    rep.add(r2);
    rep.series.push_back(std::move(w));
}

// Variation of values * weight(t) over [t0, t1] below `limit`.
inline void variation_check(ExperimentReport& rep, const RateSeries& s, double t0, double t1,
                            const std::function<double(double)>& weight, double limit, const std::string& id,
                            const std::string& name)
{
    RateSeries w = restrict_times(s, t0, t1);
    w.name = name;
    for (std::size_t i = 0; i < w.size(); ++i) w.values[i] *= weight(w.times[i]);
    double v = std::numeric_limits<double>::quiet_NaN();
    try {
        v = variation(w.values);
    } catch (const std::exception& e) {
        rep.add({id, v, limit, 0.0, Verdict::inconclusive, e.what()});
        return;
    }
    rep.add({id, v, limit, 0.0, v < limit ? Verdict::pass : Verdict::fail,
             "max/min - 1 over [" + fmt(t0) + ", " + fmt(t1) + "]"});
    rep.series.push_back(std::move(w));
}

} // namespace detail

/**
 * |u - chi| decay (C7), Hopf-Cole w decay and reconstruction residual (C13), and mass
 * drift (C5) from one run.
 */
inline ExperimentReport theorem_1_1_experiment(const ExperimentConfig& cfg, const RunBundle& b)
{
    ExperimentReport rep;
    rep.experiment = "theorem-1-1";
    detail::add_provenance(rep, cfg, b);
    detail::mark_guard(rep, b);
    const ProfileContext& ctx = b.ctx;
    const double alpha = ctx.alpha;
    const double t0 = cfg.rate_t0, t1 = cfg.fit_end();

    RateSeries diff = sup_diff_series(b.run.snapshots, [&](const EvolutionState& s) { return chi_field(b.grid, s.time, ctx); },
                                      "sup_u_minus_chi");
    rep.series.push_back(diff);
    rep.add(detail::mass_check(b, cfg.tol.mass));

    if (ctx.delta == 0.0)
        rep.notes.push_back("delta = 0: chi vanishes and |u - chi| = |u|; the optimality of the rates needs delta != 0");

    if (detail::all_tiny(diff)) {
        rep.add({"C7.rate", 0.0, 0.0, 0.0, Verdict::pass, "u - chi vanishes identically"});
    } else if (alpha < 2.0) {
        detail::slope_checks(rep, diff, t0, t1, -0.5 * alpha, "C7", cfg.tol);
    } else {
        detail::variation_check(rep, diff, t1 / 10.0, t1, [](double t) { return (1.0 + t) / std::log(2.0 + t); }, cfg.tol.log_variation,
                                "C7.log_ratio", "weighted_u_minus_chi");
        RateSeries w = restrict_times(diff, t0, t1);
        w.name = "sup_u_minus_chi_power_log";
        try {
            apply_fit(w, RateModel::power_log);
            rep.notes.push_back("t^{-1} vs t^{-1} log t residual ratio " + detail::fmt(w.residual_ratio) +
                                (w.residual_ratio >= 2.0   ? " (log model preferred)"
                                    : w.residual_ratio <= 0.5 ? " (pure power preferred)"
                                                              : " (models not separated)"));
            rep.series.push_back(std::move(w));
        } catch (const std::exception& e) {
            rep.notes.push_back(std::string("power_log fit skipped: ") + e.what());
        }
    }

    RateSeries wsup, wl2;
    wsup.name = "sup_w";
    wl2.name = "l2_w";
    double residual = 0.0, min_rho = std::numeric_limits<double>::infinity();
    for (const auto& s : b.run.snapshots) {
        if (s.time <= 0.0) continue;
        HopfColeState hc = hopf_cole_transform(s.field, ctx, s.time, b.left_tail);
        RealField rec = reconstruct_difference(hc, ctx);
        RealField direct = chi_field(b.grid, s.time, ctx);
        for (std::size_t j = 0; j < direct.size(); ++j) rec[j] -= s.field[j] - direct[j];
        residual = std::max(residual, interior_sup(rec));
        wsup.push(s.time, interior_sup(hc.w));
        RealField wi = hc.w;
        for (std::size_t j = 0; j < wi.size(); ++j)
            if (std::abs(b.grid.x(j)) > 0.8 * b.grid.half_width()) wi[j] = 0.0;
        wl2.push(s.time, l2_norm(wi));
        min_rho = std::min(min_rho, *std::min_element(hc.rho.values.begin(), hc.rho.values.end()));
    }
    rep.series.push_back(wsup);
    rep.series.push_back(wl2);
    rep.add(upper_check("C13.reconstruction", residual, cfg.tol.reconstruction, "max over snapshots, interior 80%"));
    rep.add({"INV.rho_positive", min_rho, 0.0, 0.0, min_rho > 0.0 ? Verdict::pass : Verdict::fail, "min rho over run"});
    if (detail::all_tiny(wsup)) {
        rep.add({"C13.w_rate", 0.0, 0.0, 0.0, Verdict::pass, "w vanishes identically"});
    } else if (alpha < 2.0) {
        detail::slope_checks(rep, wsup, t0, t1, -0.5 * (alpha - 1.0), "C13.w", cfg.tol);
    } else {
        detail::variation_check(rep, wsup, t1 / 10.0, t1,
                                [](double t) { return std::sqrt(1.0 + t) / std::log(2.0 + t); }, cfg.tol.log_variation,
                                "INV.w_log_ratio", "weighted_sup_w");
    }
    return rep;
}

inline ExperimentReport theorem_1_1_experiment(const ExperimentConfig& cfg)
{
    return theorem_1_1_experiment(cfg, execute_run(cfg));
}

/// Predicted limit of |Z + V|_inf (1+t)/log(1+t) for alpha = 2.
inline double alpha2_predicted_coefficient(const ProfileContext& ctx)
{
    return std::abs(ctx.b()) * std::abs(ctx.chi_star_0) * std::abs(ctx.eta_star_0) / (4.0 * sqrt_pi) * std::abs(ctx.beta1);
}

struct Alpha2ProfileSample {
    double t;
    double sup_ratio;   // |Z+V|_inf (1+t)/log(1+t)
    double zero_ratio;  // |Z(0,t)+V(0,t)| (1+t)/log(1+t)
};

/// |Z+V| on x in [-R, R], R = 10 sqrt(1+t), sampled at `points` equispaced abscissae.
inline std::vector<Alpha2ProfileSample> alpha2_profile_series(const ProfileContext& ctx, const std::vector<double>& times,
                                                             int points = 801, unsigned workers = 1)
{
    if (points < 3 || points % 2 == 0) throw std::invalid_argument("alpha2_profile_series: points must be odd and >= 3");
    std::vector<Alpha2ProfileSample> out(times.size());
    parallel_for(times.size(), workers, [&](std::size_t i) {
        const double t = times[i];
        const double R = 10.0 * std::sqrt(1.0 + t);
        std::vector<double> xs(static_cast<std::size_t>(points));
        for (int j = 0; j < points; ++j) xs[static_cast<std::size_t>(j)] = -R + 2.0 * R * j / (points - 1);
        xs[static_cast<std::size_t>(points / 2)] = 0.0;
        const std::vector<double> z = Z_profile(xs, t, ctx);
        double m = 0.0, zero = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const double v = std::abs(z[j] + V_profile(xs[j], t, ctx));
            m = std::max(m, v);
            if (xs[j] == 0.0) zero = v;
        }
        const double wgt = (1.0 + t) / std::log1p(t);
        out[i] = {t, m * wgt, zero * wgt};
    });
    return out;
}

/**
 * Second-profile checks. For alpha < 2: (1+t)^{alpha/2}|u - chi - Z| at t_max against
 * t = 10 (C8), the lower bound and sign invariants. For alpha = 2: the same with V added
 * and the log weight, plus the x = 0 comparison with the beta1 coefficient.
 */
inline ExperimentReport theorem_1_2_experiment(const ExperimentConfig& cfg, const RunBundle& b)
{
    ExperimentReport rep;
    rep.experiment = "theorem-1-2";
    detail::add_provenance(rep, cfg, b);
    detail::mark_guard(rep, b);
    const ProfileContext& ctx = b.ctx;
    const double alpha = ctx.alpha;
    const double T = cfg.fit_end();

    std::vector<const EvolutionState*> late;
    for (const auto& s : b.run.snapshots)
        if (s.time >= 10.0 - 1e-12 && s.time <= T * (1 + 1e-12)) late.push_back(&s);
    if (late.empty() || std::abs(late.front()->time - 10.0) > 1e-9) {
        rep.add({"C8.decay", std::numeric_limits<double>::quiet_NaN(), 0.5, 0.0, Verdict::inconclusive,
                 "schedule has no snapshot at t=10"});
        return rep;
    }
    std::vector<RealField> Z(late.size());
    parallel_for(late.size(), cfg.workers, [&](std::size_t i) { Z[i] = Z_field(b.grid, late[i]->time, ctx); });

    // for alpha < 2, resid_v also removes V; it is reported, not checked
    RateSeries resid, resid_v, first;
    resid.name = alpha < 2.0 ? "weighted_u_minus_chi_minus_Z" : "weighted_u_minus_chi_minus_Z_minus_V";
    resid_v.name = "weighted_u_minus_chi_minus_Z_minus_V";
    first.name = "sup_u_minus_chi";
    double center = 0.0;
    for (std::size_t i = 0; i < late.size(); ++i) {
        const double t = late[i]->time;
        RealField chi_t = chi_field(b.grid, t, ctx);
        RealField d1 = late[i]->field;
        RealField r(b.grid), rv(b.grid);
        for (std::size_t j = 0; j < r.size(); ++j) {
            d1[j] -= chi_t[j];
            r[j] = d1[j] - Z[i][j];
            rv[j] = r[j] - V_profile(b.grid.x(j), t, ctx);
        }
        const double wgt = alpha < 2.0 ? std::pow(1.0 + t, 0.5 * alpha) : (1.0 + t) / std::log1p(t);
        resid.push(t, wgt * interior_sup(alpha < 2.0 ? r : rv));
        resid_v.push(t, wgt * interior_sup(rv));
        first.push(t, interior_sup(d1));
        if (i + 1 == late.size()) center = d1[b.grid.size() / 2];
    }
    rep.series.push_back(resid);
    if (alpha < 2.0) {
        rep.series.push_back(resid_v);
        if (resid_v.values.front() > 0.0)
            rep.notes.push_back("with V also removed the weighted residual ratio is " +
                                detail::fmt(resid_v.values.back() / resid_v.values.front()));
    }
    rep.series.push_back(first);

    const double ratio = resid.values.front() > 0.0 ? resid.values.back() / resid.values.front() : 0.0;
    if (alpha < 2.0)
        rep.add(upper_check("C8.decay", ratio, cfg.tol.decay_ratio, "weighted residual at t=" + detail::fmt(T) + " over t=10"));
    else
        rep.add(upper_check("T12.alpha2_decay", ratio, 1.0, "log-weighted residual at t=" + detail::fmt(T) + " over t=10"));

    if (alpha < 2.0) {
        const double beta0 = *ctx.beta0;
        if (std::abs(beta0) < 1e-6) {
            rep.add({"INV.lower_bound", std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, Verdict::skipped,
                     "|beta0| < 1e-6: degenerate case, lower bound vacuous"});
        } else {
            const double coef = Z_leading_coefficient(ctx);
            double lowest = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < first.size(); ++i)
                if (first.times[i] >= T / 10.0 * (1 - 1e-12))
                    lowest = std::min(lowest, std::pow(first.times[i], 0.5 * alpha) * first.values[i]);
            rep.add({"INV.lower_bound", lowest, 0.5 * std::abs(coef), 0.0,
                     lowest >= 0.5 * std::abs(coef) ? Verdict::pass : Verdict::fail,
                     "min over final decade of t^{alpha/2}|u - chi| vs half the Z coefficient"});
            const bool same = (center > 0.0) == (coef > 0.0);
            rep.add({"INV.sign", center, coef, 0.0, same ? Verdict::pass : Verdict::fail,
                     "sign of (u - chi)(0, t_max) vs Z leading coefficient"});
        }
    } else if (std::abs(ctx.beta1) < 1e-6) {
        rep.add({"T12.alpha2_coefficient", std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, Verdict::skipped,
                 "|beta1| < 1e-6: degenerate case, lower bound vacuous"});
    } else {
        const double P = alpha2_predicted_coefficient(ctx);
        auto s = alpha2_profile_series(ctx, {T}, 801, 1);
        rep.add({"T12.alpha2_coefficient_ratio", s[0].zero_ratio / P, 1.0, 0.2, Verdict::skipped,
                 "reported only: |Z(0,t)+V(0,t)|(1+t)/log(1+t) at t_max over the beta1 coefficient"});
    }
    return rep;
}

inline ExperimentReport theorem_1_2_experiment(const ExperimentConfig& cfg)
{
    return theorem_1_2_experiment(cfg, execute_run(cfg));
}

/// Slopes of |d^l u|_2 and |d^l u|_inf for l = 0, 1 on [t0, t1].
inline ExperimentReport proposition_2_1_check(const EvolveResult& run, double t0, double t1,
                                              const Tolerances& tol = {})
{
    ExperimentReport rep;
    rep.experiment = "prop-2-1";
    if (run.snapshots.empty()) throw std::invalid_argument("proposition_2_1_check: no snapshots");
    for (int l : {0, 1}) {
        RateSeries s2, sinf;
        s2.name = "l2_d" + std::to_string(l);
        sinf.name = "sup_d" + std::to_string(l);
        for (const auto& st : run.snapshots) {
            RealField d = spectral_derivative(st.field, l);
            s2.push(st.time, l2_norm(d));
            sinf.push(st.time, sup_norm(d));
        }
        rep.series.push_back(s2);
        rep.series.push_back(sinf);
        const std::string id = "P21.l" + std::to_string(l);
        if (detail::all_tiny(s2)) {
            rep.add({id, 0.0, 0.0, 0.0, Verdict::pass, "u vanishes identically"});
            continue;
        }
        detail::slope_checks(rep, s2, t0, t1, -0.25 - 0.5 * l, id + ".l2", tol);
        detail::slope_checks(rep, sinf, t0, t1, -0.5 - 0.5 * l, id + ".inf", tol);
    }
    return rep;
}

inline ExperimentReport proposition_2_1_check(const ExperimentConfig& cfg, const RunBundle& b)
{
    ExperimentReport rep = proposition_2_1_check(b.run, cfg.rate_t0, cfg.fit_end(), cfg.tol);
    detail::add_provenance(rep, cfg, b);
    detail::mark_guard(rep, b);
    if (rep.inconclusive)
        for (auto& r : rep.results)
            if (r.verdict == Verdict::fail) r.verdict = Verdict::inconclusive;
    rep.add(detail::mass_check(b, cfg.tol.mass));
    return rep;
}

/**
 * (1+t)|v - V|_inf for the forced linear equation over `times` (C12). Bounded means the
 * log-log slope of the weighted residual on [t0, t1] does not exceed `max_slope`.
 */
inline ExperimentReport proposition_5_1_check(const ModelParams& params, double delta, double L, std::size_t n,
                                              const std::vector<double>& times, double t0 = 10.0, double t1 = 1000.0,
                                              double max_slope = 0.05)
{
    ExperimentReport rep;
    rep.experiment = "prop-5-1";
    if (std::abs(delta) > 1.0) throw std::invalid_argument("proposition_5_1_check: |delta| must be <= 1");
    Grid1D g(L, n);
    ProfileContext ctx = make_context(params, delta, 2.0, 0.0, 0.0);
    EvolveResult res = evolve_forced_linear(g, ctx, times);
    GuardResult guard = boundary_guard(res.history);
    rep.provenance = {{"grid.L", detail::fmt(L)},
                      {"grid.n", std::to_string(n)},
                      {"time.dt", detail::fmt(default_time_step(g, params.k))},
                      {"delta", detail::fmt(delta)},
                      {"d", detail::fmt(ctx.d_const)},
                      {"guard.valid", guard.valid ? "true" : "false"}};
    RateSeries s = sup_diff_series(res.snapshots, [&](const EvolutionState& st) { return V_field(g, st.time, ctx); },
                                   "sup_v_minus_V");
    RateSeries w;
    w.name = "weighted_v_minus_V";
    for (std::size_t i = 0; i < s.size(); ++i) w.push(s.times[i], (1.0 + s.times[i]) * s.values[i]);
    rep.series.push_back(s);
    rep.series.push_back(w);
    if (!guard.valid) {
        rep.inconclusive = true;
        rep.notes.push_back("boundary guard tripped at t=" + detail::fmt(guard.worst_time) + "; enlarge L");
    }
    if (detail::all_tiny(s)) {
        rep.add({"C12.bounded", 0.0, 0.0, 0.0, Verdict::pass, "v and V vanish identically"});
        return rep;
    }
    RateSeries fit = restrict_times(w, t0, t1);
    fit.name = "weighted_v_minus_V_fit";
    apply_fit(fit, RateModel::power, 1.0);
    rep.add(upper_check("C12.bounded", fit.exponent, max_slope,
                        "log-log slope of (1+t)|v - V| on [" + detail::fmt(t0) + ", " + detail::fmt(t1) + "]"));
    rep.series.push_back(fit);
    return rep;
}

/**
 * (1+t)^{alpha/2} max_x |U[psi0](x,t,0) - Z(x,t)| at each time (C9), with x on the
 * self-similar grid {j sqrt(t) : |j| <= multiples}.
 */
inline ExperimentReport proposition_4_1_check(const ModelParams& params, const InitialDatum& u0, double L_tails,
                                              const std::vector<double>& times, int multiples = 3,
                                              unsigned workers = 1)
{
    if (multiples < 1) throw std::invalid_argument("proposition_4_1_check: multiples must be >= 1");
    ExperimentReport rep;
    rep.experiment = "prop-4-1";
    ProfileContext ctx = context_for_datum(params, u0, L_tails);
    rep.provenance = {{"delta", detail::fmt(ctx.delta)},
                      {"tails.c_plus", detail::fmt(ctx.c_plus)},
                      {"tails.c_minus", detail::fmt(ctx.c_minus)},
                      {"tails.L", detail::fmt(L_tails)},
                      {"targets.multiples", std::to_string(multiples)}};
    // H = int_{-inf}^y (u0 - chi_star) = eta_star z0
    auto H = [&](double y) { return z0_datum(u0, ctx, y) * eta_star(y, ctx); };
    RateSeries s;
    s.name = "weighted_U_minus_Z";
    std::vector<double> vals(times.size());
    parallel_for(times.size(), workers, [&](std::size_t i) {
        const double t = times[i];
        std::vector<double> xs;
        for (int j = -multiples; j <= multiples; ++j) xs.push_back(j * std::sqrt(t));
        const std::vector<double> U = U_operator(H, t, 0.0, ctx, xs);
        const std::vector<double> Zv = Z_profile(xs, t, ctx);
        double m = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) m = std::max(m, std::abs(U[j] - Zv[j]));
        vals[i] = std::pow(1.0 + t, 0.5 * ctx.alpha) * m;
    });
    for (std::size_t i = 0; i < times.size(); ++i) s.push(times[i], vals[i]);
    rep.series.push_back(s);
    if (s.size() >= 2 && s.values.front() > 0.0)
        rep.add(upper_check("C9.decay", s.values.back() / s.values.front(), 0.5,
                            "weighted gap at t=" + detail::fmt(s.times.back()) + " over t=" + detail::fmt(s.times.front())));
    else
        rep.add({"C9.decay", 0.0, 0.5, 0.0, Verdict::pass, "U[psi0] and Z vanish"});
    return rep;
}

} // namespace kdvb
