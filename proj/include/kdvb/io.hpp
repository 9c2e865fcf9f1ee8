#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdvb/harness.hpp"
#include "kdvb/hopf_cole.hpp"

namespace kdvb {

/// Shortest round-trip decimal form; identical on every run.
inline std::string format_double(double v)
{
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Flat dotted key=value pairs. '#' starts a comment; later keys override earlier ones.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>")
    {
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = trim(line);
            if (line.empty()) continue;
            try {
                c.apply_override(line);
            } catch (const ConfigError& e) {
                throw ConfigError(e.field(), source + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        return c;
    }

    static Config parse_string(const std::string& text)
    {
        std::istringstream is(text);
        return parse(is);
    }

    static Config load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw ConfigError("", "cannot open config file " + path);
        return parse(in, path);
    }

    void apply_override(const std::string& kv)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("", "expected key=value, got '" + kv + "'");
        const std::string key = trim(kv.substr(0, eq));
        if (key.empty()) throw ConfigError("", "empty key in '" + kv + "'");
        for (char ch : key)
            if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
                throw ConfigError(key, "invalid character in key");
        values_[key] = trim(kv.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get(const std::string& key, const std::string& def) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        return to_double(key, it->second);
    }

    long long get_int(const std::string& key, long long def) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        long long v = 0;
        const std::string& s = it->second;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError(key, "not an integer: '" + s + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool def) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError(key, "expected true or false, got '" + it->second + "'");
    }

    std::vector<double> get_list(const std::string& key) const
    {
        std::vector<double> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
        return out;
    }

    /// Sorted key=value lines, each prefixed with `prefix`.
    void write(std::ostream& os, const std::string& prefix = "") const
    {
        for (const auto& [k, v] : values_) os << prefix << k << '=' << v << '\n';
    }

    static std::string trim(const std::string& s)
    {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return {};
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

private:
    static double to_double(const std::string& key, const std::string& s)
    {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
            throw ConfigError(key, "not a finite number: '" + s + "'");
        return v;
    }

    std::map<std::string, std::string> values_;
};

struct SnapshotHeader {
    double L = 0.0;
    std::uint64_t n = 0;
    double t = 0.0;
    double b = 0.0, c = 0.0, k = 0.0;
    double delta_windowed = 0.0;
};

namespace detail {

inline constexpr char snapshot_magic[8] = {'K', 'D', 'V', 'B', 'S', 'N', 'P', '1'};

template <class T>
void put_le(std::ostream& os, T v)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::istream& is)
{
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), 8)) throw std::runtime_error("snapshot: truncated file");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

/// Magic, header (L, n, t, b, c, k, windowed delta), then n little-endian doubles.
inline void write_snapshot(std::ostream& os, const RealField& u, double t, const ModelParams& p, double delta_windowed)
{
    os.write(detail::snapshot_magic, 8);
    detail::put_le(os, u.grid.half_width());
    detail::put_le(os, static_cast<std::uint64_t>(u.size()));
    for (double v : {t, p.b, p.c, p.k, delta_windowed}) detail::put_le(os, v);
    for (double v : u.values) detail::put_le(os, v);
    if (!os) throw std::runtime_error("snapshot: write failed");
}

inline void write_snapshot(const std::string& path, const RealField& u, double t, const ModelParams& p,
                           double delta_windowed)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    write_snapshot(os, u, t, p, delta_windowed);
}

inline std::pair<SnapshotHeader, RealField> read_snapshot(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, detail::snapshot_magic, 8) != 0)
        throw std::runtime_error("snapshot: bad magic");
    SnapshotHeader h;
    h.L = detail::get_le<double>(is);
    h.n = detail::get_le<std::uint64_t>(is);
    h.t = detail::get_le<double>(is);
    h.b = detail::get_le<double>(is);
    h.c = detail::get_le<double>(is);
    h.k = detail::get_le<double>(is);
    h.delta_windowed = detail::get_le<double>(is);
    if (h.n > (1ull << 26)) throw std::runtime_error("snapshot: implausible size");
    Grid1D g(h.L, static_cast<std::size_t>(h.n));
    RealField u(g);
    for (auto& v : u.values) v = detail::get_le<double>(is);
    return {h, u};
}

inline std::pair<SnapshotHeader, RealField> read_snapshot(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    return read_snapshot(is);
}

/// Config echo as '# key=value' comment lines.
inline void write_config_echo(std::ostream& os, const Config& cfg) { cfg.write(os, "# "); }

inline void write_diagnostics_csv(std::ostream& os, const std::vector<Diagnostics>& hist, const Config& echo)
{
    write_config_echo(os, echo);
    os << "t,mass,sup_norm,l2_norm,boundary_norm\n";
    for (const auto& d : hist)
        os << format_double(d.t) << ',' << format_double(d.mass) << ',' << format_double(d.sup_norm) << ','
           << format_double(d.l2_norm) << ',' << format_double(d.boundary_norm) << '\n';
}

/// x, chi, eta, V, Z on the grid at time t.
inline void write_profiles_csv(std::ostream& os, const Grid1D& g, double t, const ProfileContext& ctx, const Config& echo)
{
    write_config_echo(os, echo);
    os << "# t=" << format_double(t) << '\n';
    os << "x,chi,eta,V,Z\n";
    const RealField Z = t > 0.0 ? Z_field(g, t, ctx, 1.0) : RealField(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        os << format_double(x) << ',' << format_double(chi(x, t, ctx)) << ',' << format_double(eta(x, t, ctx)) << ','
           << format_double(V_profile(x, t, ctx)) << ',' << format_double(Z[j]) << '\n';
    }
}

struct HopfColeRow {
    double t;
    double w_sup;
    double w_x_sup;
    double w_l2;
    double residual;
};

/// Norms over the interior 80% of the box, where the seam does not enter.
inline HopfColeRow hopf_cole_row(const EvolutionState& s, const ProfileContext& ctx, double left_tail)
{
    HopfColeState hc = hopf_cole_transform(s.field, ctx, s.time, left_tail);
    RealField rec = reconstruct_difference(hc, ctx);
    const Grid1D& g = s.field.grid;
    RealField wi = hc.w;
    for (std::size_t j = 0; j < g.size(); ++j) {
        rec[j] -= s.field[j] - chi(g.x(j), s.time, ctx);
        if (std::abs(g.x(j)) > 0.8 * g.half_width()) wi[j] = 0.0;
    }
    return {s.time, interior_sup(hc.w), interior_sup(hc.w_x), l2_norm(wi), interior_sup(rec)};
}

inline void write_hopf_cole_csv(std::ostream& os, const std::vector<HopfColeRow>& rows, const Config& echo)
{
    write_config_echo(os, echo);
    os << "t,w_sup,w_x_sup,w_l2,reconstruction_residual\n";
    for (const auto& r : rows)
        os << format_double(r.t) << ',' << format_double(r.w_sup) << ',' << format_double(r.w_x_sup) << ','
           << format_double(r.w_l2) << ',' << format_double(r.residual) << '\n';
}

/// Structured text: key=value blocks and CSV sections.
inline void write_report(std::ostream& os, const ExperimentReport& rep)
{
    os << "experiment=" << rep.experiment << '\n';
    os << "inconclusive=" << (rep.inconclusive ? "true" : "false") << '\n';
    os << "\n[config]\n";
    for (const auto& [k, v] : rep.config) os << k << '=' << v << '\n';
    os << "\n[provenance]\n";
    for (const auto& [k, v] : rep.provenance) os << k << '=' << v << '\n';
    for (const auto& s : rep.series) {
        os << "\n[series " << s.name << "]\n";
        os << "model=" << to_string(s.model) << '\n';
        for (auto [k, v] : {std::pair<const char*, double>{"exponent", s.exponent},
                            {"amplitude", s.amplitude},
                            {"r_squared", s.r_squared},
                            {"drift", s.drift},
                            {"residual_ratio", s.residual_ratio}})
            if (std::isfinite(v)) os << k << '=' << format_double(v) << '\n';
        os << "t,value\n";
        for (std::size_t i = 0; i < s.size(); ++i) os << format_double(s.times[i]) << ',' << format_double(s.values[i]) << '\n';
    }
    os << "\n[results]\n";
    os << "id,measured,target,tolerance,verdict,note\n";
    for (const auto& r : rep.results)
        os << r.id << ',' << format_double(r.measured) << ',' << format_double(r.target) << ','
           << format_double(r.tolerance) << ',' << to_string(r.verdict) << ",\"" << r.note << "\"\n";
    if (!rep.notes.empty()) {
        os << "\n[notes]\n";
        for (const auto& n : rep.notes) os << n << '\n';
    }
}

/// One JSON object per criterion: id, measured, target, tolerance, verdict.
inline void write_json_lines(std::ostream& os, const ExperimentReport& rep)
{
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    for (const auto& r : rep.results) {
        nlohmann::json j = {{"id", r.id},
                            {"measured", num(r.measured)},
                            {"target", num(r.target)},
                            {"tolerance", num(r.tolerance)},
                            {"verdict", to_string(r.verdict)}};
        os << j.dump() << '\n';
    }
}

} // namespace kdvb
