#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kdvb/harness.hpp"
#include "kdvb/io.hpp"

namespace kdvb::app {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_inconclusive = 3 };

inline const std::vector<std::pair<std::string, std::string>>& default_keys()
{
    static const std::vector<std::pair<std::string, std::string>> d = {
        {"model.b", "1"},
        {"model.c", "0"},
        {"model.k", "1"},
        {"datum.family", "algebraic"},
        {"datum.A", "0.1"},
        {"datum.alpha", "1.5"},
        {"datum.epsilon", "0"},
        {"datum.delta", "0"},
        {"datum.path", ""},
        {"window.enabled", "true"},
        {"window.start", "0.9"},
        {"window.stop", "0.98"},
        {"grid.L", "400"},
        {"grid.n", "8192"},
        {"time.t_max", "1000"},
        {"time.times", ""},
        {"time.dense", "16"},
        {"time.dt", "0"},
        {"time.doubling", "true"},
        {"experiment.kind", "none"},
        {"experiment.rate_t0", "100"},
        {"experiment.rate_t1", "0"},
        {"experiment.workers", "1"},
        {"profiles.times", "1,10,100"},
        {"compare.snapshot", ""},
        {"compare.reference", "chi"},
        {"constants.request", "auto"},
        {"constants.delta", ""},
        {"constants.c_plus", ""},
        {"constants.c_minus", ""},
        {"tolerances.slope", "0.1"},
        {"tolerances.r_squared", "0.98"},
        {"tolerances.log_variation", "0.25"},
        {"tolerances.decay_ratio", "0.5"},
        {"tolerances.reconstruction", "1e-6"},
        {"tolerances.mass", "1e-8"},
    };
    return d;
}

struct RunConfig {
    Config resolved;
    ModelParams params;
    std::string family;
    double A = 0.1, alpha = 1.5, epsilon = 0.0, delta = 0.0;
    std::string datum_path;
    Window window;
    double L = 400.0;
    std::size_t n = 8192;
    double t_max = 1000.0;
    std::vector<double> times;
    int dense = 16;
    EvolveOptions evolve;
    std::string experiment;
    double rate_t0 = 100.0, rate_t1 = 0.0;
    unsigned workers = 1;
    std::vector<double> profile_times;
    std::string compare_snapshot, compare_reference;
    std::string constants_request;
    std::optional<double> delta_override, c_plus, c_minus;
    Tolerances tol;

    std::vector<double> schedule() const { return times.empty() ? snapshot_schedule(t_max, dense) : times; }
};

namespace detail {

inline std::optional<double> optional_double(const Config& c, const std::string& key)
{
    if (c.get(key, "").empty()) return std::nullopt;
    return c.get_double(key, 0.0);
}

inline bool is_rate_experiment(const std::string& e)
{
    return e == "theorem-1-1" || e == "theorem-1-2" || e == "prop-2-1" || e == "prop-5-1";
}

} // namespace detail

/// Fills defaults, rejects unknown keys and validates every field.
inline RunConfig resolve(const Config& raw)
{
    std::set<std::string> known;
    Config c;
    for (const auto& [k, v] : default_keys()) {
        known.insert(k);
        c.set(k, v);
    }
    for (const auto& [k, v] : raw.values()) {
        if (!known.count(k)) throw ConfigError(k, "unknown key");
        c.set(k, v);
    }
    RunConfig r;
    r.resolved = c;
    const double b = c.get_double("model.b", 1);
    if (b == 0.0) throw ConfigError("model.b", "must be nonzero");
    r.params = ModelParams(b, c.get_double("model.c", 0), c.get_double("model.k", 1));

    r.family = c.get("datum.family", "");
    static const std::set<std::string> families{"algebraic", "gaussian", "diffusion_wave", "zero", "file"};
    if (!families.count(r.family))
        throw ConfigError("datum.family", "expected algebraic, gaussian, diffusion_wave, zero or file");
    r.A = c.get_double("datum.A", 0.1);
    r.alpha = c.get_double("datum.alpha", 1.5);
    if (!(r.alpha > 1.0 && r.alpha <= 2.0)) throw ConfigError("datum.alpha", "must lie in (1, 2]");
    r.epsilon = c.get_double("datum.epsilon", 0.0);
    if (std::abs(r.epsilon) > 1.0) throw ConfigError("datum.epsilon", "must satisfy |epsilon| <= 1");
    r.delta = c.get_double("datum.delta", 0.0);
    r.datum_path = c.get("datum.path", "");
    if (r.family == "file" && r.datum_path.empty()) throw ConfigError("datum.path", "required for datum.family=file");

    r.window.enabled = c.get_bool("window.enabled", true);
    r.window.start = c.get_double("window.start", 0.9);
    r.window.stop = c.get_double("window.stop", 0.98);
    if (!(0.0 < r.window.start && r.window.start < r.window.stop && r.window.stop <= 1.0))
        throw ConfigError("window.start", "need 0 < window.start < window.stop <= 1");

    r.L = c.get_double("grid.L", 400);
    if (!(r.L > 0.0)) throw ConfigError("grid.L", "must be positive");
    const long long n = c.get_int("grid.n", 8192);
    if (n < 16 || (n & (n - 1)) != 0) throw ConfigError("grid.n", "must be a power of two >= 16");
    r.n = static_cast<std::size_t>(n);

    r.t_max = c.get_double("time.t_max", 1000);
    if (!(r.t_max > 0.0)) throw ConfigError("time.t_max", "must be positive");
    r.times = c.get_list("time.times");
    for (std::size_t i = 0; i < r.times.size(); ++i)
        if (r.times[i] < 0.0 || (i > 0 && !(r.times[i] > r.times[i - 1])) || r.times[i] > r.t_max)
            throw ConfigError("time.times", "must be increasing, nonnegative and <= time.t_max");
    r.dense = static_cast<int>(c.get_int("time.dense", 16));
    if (r.dense < 2) throw ConfigError("time.dense", "must be >= 2");
    r.evolve.dt = c.get_double("time.dt", 0.0);
    if (r.evolve.dt < 0.0) throw ConfigError("time.dt", "must be >= 0 (0 selects the default)");
    r.evolve.allow_doubling = c.get_bool("time.doubling", true);

    r.experiment = c.get("experiment.kind", "none");
    static const std::set<std::string> kinds{"none", "theorem-1-1", "theorem-1-2", "prop-2-1", "prop-5-1", "profiles-only"};
    if (!kinds.count(r.experiment))
        throw ConfigError("experiment.kind",
                          "expected none, theorem-1-1, theorem-1-2, prop-2-1, prop-5-1 or profiles-only");
    if (detail::is_rate_experiment(r.experiment) && r.t_max < 10.0)
        throw ConfigError("time.t_max", "rate experiments need time.t_max >= 10");
    if ((r.experiment == "theorem-1-1" || r.experiment == "theorem-1-2") && r.family == "file")
        throw ConfigError("datum.family", "theorem experiments need a closed-form datum for the tail limits");
    r.rate_t0 = c.get_double("experiment.rate_t0", 100);
    r.rate_t1 = c.get_double("experiment.rate_t1", 0);
    if (!(r.rate_t0 >= 1.0)) throw ConfigError("experiment.rate_t0", "must be >= 1");
    const long long w = c.get_int("experiment.workers", 1);
    if (w < 1 || w > 256) throw ConfigError("experiment.workers", "must lie in [1, 256]");
    r.workers = static_cast<unsigned>(w);

    r.profile_times = c.get_list("profiles.times");
    for (double t : r.profile_times)
        if (t < 0.0) throw ConfigError("profiles.times", "must be nonnegative");
    r.compare_snapshot = c.get("compare.snapshot", "");
    r.compare_reference = c.get("compare.reference", "chi");
    r.constants_request = c.get("constants.request", "auto");
    if (r.constants_request != "auto" && r.constants_request != "beta0" && r.constants_request != "beta1")
        throw ConfigError("constants.request", "expected auto, beta0 or beta1");
    r.delta_override = detail::optional_double(c, "constants.delta");
    r.c_plus = detail::optional_double(c, "constants.c_plus");
    r.c_minus = detail::optional_double(c, "constants.c_minus");
    if (r.c_plus.has_value() != r.c_minus.has_value())
        throw ConfigError("constants.c_plus", "set both constants.c_plus and constants.c_minus, or neither");

    r.tol.slope = c.get_double("tolerances.slope", 0.1);
    r.tol.r_squared = c.get_double("tolerances.r_squared", 0.98);
    r.tol.log_variation = c.get_double("tolerances.log_variation", 0.25);
    r.tol.decay_ratio = c.get_double("tolerances.decay_ratio", 0.5);
    r.tol.reconstruction = c.get_double("tolerances.reconstruction", 1e-6);
    r.tol.mass = c.get_double("tolerances.mass", 1e-8);
    return r;
}

inline InitialDatum make_datum(const RunConfig& r)
{
    InitialDatum d = InitialDatum::zero(r.alpha);
    if (r.family == "algebraic")
        d = InitialDatum::algebraic(r.A, r.alpha, r.epsilon);
    else if (r.family == "gaussian")
        d = InitialDatum::gaussian(r.A, r.alpha);
    else if (r.family == "diffusion_wave")
        d = InitialDatum::diffusion_wave(r.params.b, r.delta, r.alpha);
    else if (r.family == "file") {
        auto [h, u] = read_snapshot(r.datum_path);
        if (h.n != r.n || h.L != r.L) throw ConfigError("datum.path", "snapshot grid differs from grid.L / grid.n");
        return InitialDatum::samples(u, r.alpha);
    }
    d.set_window(r.window);
    return d;
}

inline ExperimentConfig experiment_config(const RunConfig& r)
{
    ExperimentConfig e;
    e.params = r.params;
    e.datum = make_datum(r);
    e.L = r.L;
    e.n = r.n;
    e.t_max = r.t_max;
    e.times = r.schedule();
    e.evolve = r.evolve;
    e.rate_t0 = r.rate_t0;
    e.rate_t1 = r.rate_t1;
    e.workers = r.workers;
    e.tol = r.tol;
    return e;
}

/// Context for profiles and constants: datum-derived unless overridden in the constants block.
inline ProfileContext profile_context(const RunConfig& r)
{
    const InitialDatum d = make_datum(r);
    const double delta = r.delta_override ? *r.delta_override : total_mass(d);
    if (r.c_plus) return make_context(r.params, delta, r.alpha, *r.c_plus, *r.c_minus);
    if (d.family() == DatumFamily::samples) return make_context(r.params, delta, r.alpha, 0.0, 0.0);
    if (!r.delta_override) return context_for_datum(r.params, d, r.L);
    ProfileContext probe = make_context(r.params, delta, r.alpha, 0.0, 0.0);
    TailLimits tl = tail_limits([&](double x) { return z0_datum(d, probe, x); }, r.alpha, r.L);
    ProfileContext ctx = make_context(r.params, delta, r.alpha, tl.c_plus, tl.c_minus);
    ctx.c_plus_error = tl.err_plus;
    ctx.c_minus_error = tl.err_minus;
    return ctx;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

inline std::string time_tag(std::size_t i)
{
    std::ostringstream os;
    os << std::setw(4) << std::setfill('0') << i;
    return os.str();
}

inline void write_report_files(const std::filesystem::path& dir, ExperimentReport& rep, const Config& echo)
{
    for (const auto& [k, v] : echo.values()) rep.config.emplace_back(k, v);
    auto txt = open_out(dir / "report.txt");
    write_report(txt, rep);
    auto jl = open_out(dir / "report.jsonl");
    write_json_lines(jl, rep);
}

inline int report_exit(const ExperimentReport& rep) { return rep.inconclusive ? exit_inconclusive : exit_ok; }

} // namespace detail

/// profiles_<i>.csv (x, chi, eta, V, Z) for each profiles.times entry.
inline int cmd_profiles(const RunConfig& r, const std::filesystem::path& out, std::ostream& log)
{
    std::filesystem::create_directories(out);
    const ProfileContext ctx = profile_context(r);
    const Grid1D g(r.L, r.n);
    for (std::size_t i = 0; i < r.profile_times.size(); ++i) {
        const auto path = out / ("profiles_" + detail::time_tag(i) + ".csv");
        auto os = detail::open_out(path);
        write_profiles_csv(os, g, r.profile_times[i], ctx, r.resolved);
        log << "wrote " << path.string() << '\n';
    }
    return exit_ok;
}

/// Flat key=value block of the constants that enter the profiles.
inline int cmd_constants(const RunConfig& r, std::ostream& out)
{
    if (r.constants_request == "beta0" && r.alpha >= 2.0)
        throw ConfigError("constants.request", "beta0 is singular at alpha = 2; request beta1 instead");
    const ProfileContext ctx = profile_context(r);
    write_config_echo(out, r.resolved);
    auto kv = [&](const char* k, double v) { out << k << '=' << format_double(v) << '\n'; };
    kv("alpha", ctx.alpha);
    kv("delta", ctx.delta);
    kv("d", ctx.d_const);
    kv("chi_star_0", ctx.chi_star_0);
    kv("eta_star_0", ctx.eta_star_0);
    kv("c_plus", ctx.c_plus);
    kv("c_plus_error", ctx.c_plus_error);
    kv("c_minus", ctx.c_minus);
    kv("c_minus_error", ctx.c_minus_error);
    if (ctx.alpha < 2.0 && r.constants_request != "beta1") {
        kv("beta0", *ctx.beta0);
        kv("Z_leading_coefficient", Z_leading_coefficient(ctx));
    }
    if (ctx.alpha >= 2.0 || r.constants_request != "beta0") kv("beta1", ctx.beta1);
    if (ctx.alpha >= 2.0) kv("alpha2_coefficient", alpha2_predicted_coefficient(ctx));
    return exit_ok;
}

/// x, u, ref, diff with a footer of L2 and sup norms of diff.
inline int cmd_compare(const RunConfig& r, const std::filesystem::path& out, std::ostream& log)
{
    if (r.compare_snapshot.empty()) throw ConfigError("compare.snapshot", "required by the compare command");
    auto [h, u] = read_snapshot(r.compare_snapshot);
    if (h.n != r.n || h.L != r.L) throw ConfigError("compare.snapshot", "snapshot grid differs from grid.L / grid.n");
    const Grid1D& g = u.grid;
    RealField ref(g);
    const std::string& ref_kind = r.compare_reference;
    if (ref_kind == "chi" || ref_kind == "chi+Z") {
        const ProfileContext ctx = profile_context(r);
        ref = chi_field(g, h.t, ctx);
        if (ref_kind == "chi+Z" && h.t > 0.0) {
            const RealField Z = Z_field(g, h.t, ctx, 1.0);
            for (std::size_t j = 0; j < g.size(); ++j) ref[j] += Z[j];
        }
    } else if (ref_kind == "zero") {
    } else {
        auto [h2, v] = read_snapshot(ref_kind);
        if (h2.n != h.n || h2.L != h.L) throw ConfigError("compare.reference", "reference snapshot is on a different grid");
        ref = v;
    }
    std::filesystem::create_directories(out);
    auto os = detail::open_out(out / "compare.csv");
    write_config_echo(os, r.resolved);
    os << "# t=" << format_double(h.t) << '\n';
    os << "x,u,ref,diff\n";
    RealField diff(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        diff[j] = u[j] - ref[j];
        os << format_double(g.x(j)) << ',' << format_double(u[j]) << ',' << format_double(ref[j]) << ','
           << format_double(diff[j]) << '\n';
    }
    os << "# l2=" << format_double(l2_norm(diff)) << '\n';
    os << "# linf=" << format_double(sup_norm(diff)) << '\n';
    log << "l2=" << format_double(l2_norm(diff)) << "\nlinf=" << format_double(sup_norm(diff)) << '\n';
    return exit_ok;
}

/**
 * Evolves the configured datum and writes config.txt, diagnostics.csv, snapshots/ and,
 * when an experiment is selected, report.txt and report.jsonl.
 */
inline int cmd_run(const RunConfig& r, const std::filesystem::path& out, std::ostream& log)
{
    std::filesystem::create_directories(out);
    {
        auto os = detail::open_out(out / "config.txt");
        r.resolved.write(os);
    }
    if (r.experiment == "profiles-only") return cmd_profiles(r, out, log);

    if (r.experiment == "prop-5-1") {
        const double delta = r.delta_override ? *r.delta_override : total_mass(make_datum(r));
        ExperimentReport rep =
            proposition_5_1_check(r.params, delta, r.L, r.n, r.schedule(), 10.0, r.rate_t1 > 0.0 ? r.rate_t1 : r.t_max);
        detail::write_report_files(out, rep, r.resolved);
        log << "prop-5-1: " << (rep.all_passed() ? "all checks pass" : "some checks fail") << '\n';
        return detail::report_exit(rep);
    }

    const ExperimentConfig ec = experiment_config(r);
    const RunBundle b = execute_run(ec);
    {
        auto os = detail::open_out(out / "diagnostics.csv");
        write_diagnostics_csv(os, b.run.history, r.resolved);
    }
    std::filesystem::create_directories(out / "snapshots");
    {
        auto idx = detail::open_out(out / "snapshots" / "index.csv");
        write_config_echo(idx, r.resolved);
        idx << "file,t\n";
        for (std::size_t i = 0; i < b.run.snapshots.size(); ++i) {
            const auto& s = b.run.snapshots[i];
            const std::string name = "snap_" + detail::time_tag(i) + ".bin";
            write_snapshot((out / "snapshots" / name).string(), s.field, s.time, r.params, b.initial_mass);
            idx << name << ',' << format_double(s.time) << '\n';
        }
    }
    if (ec.datum.family() != DatumFamily::samples) {
        std::vector<HopfColeRow> rows;
        for (const auto& s : b.run.snapshots)
            if (s.time > 0.0) rows.push_back(hopf_cole_row(s, b.ctx, b.left_tail));
        auto os = detail::open_out(out / "hopf_cole.csv");
        write_hopf_cole_csv(os, rows, r.resolved);
    }
    log << "run: " << b.run.snapshots.size() << " snapshots, " << b.run.history.size() - 1 << " steps"
        << (b.guard.valid ? "" : ", boundary guard tripped") << '\n';

    if (r.experiment == "none") return b.guard.valid ? exit_ok : exit_inconclusive;
    ExperimentReport rep;
    if (r.experiment == "theorem-1-1")
        rep = theorem_1_1_experiment(ec, b);
    else if (r.experiment == "theorem-1-2")
        rep = theorem_1_2_experiment(ec, b);
    else
        rep = proposition_2_1_check(ec, b);
    detail::write_report_files(out, rep, r.resolved);
    for (const auto& res : rep.results)
        log << res.id << ' ' << to_string(res.verdict) << " measured=" << format_double(res.measured) << '\n';
    return detail::report_exit(rep);
}

/// Maps exceptions to exit codes: config errors 1, numerical failures 2.
template <class F>
int guarded(F&& f, std::ostream& err)
{
    try {
        return f();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const QuadratureError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace kdvb::app
