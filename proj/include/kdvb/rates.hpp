#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvb/grid.hpp"

namespace kdvb {

enum class RateModel { power, power_log };

inline std::string to_string(RateModel m) { return m == RateModel::power ? "power" : "power_log"; }

/**
 * A measured decay series. For the power model the fit is log v = log a + p log t.
 * For the power_log model q = v (1+t)/log(1+t) is fitted to a constant: amplitude
 * is its geometric mean, drift is max(q)/min(q) - 1, and residual_ratio compares
 * the best fixed-shape t^{-1} fit against the best t^{-1} log t fit (> 1 favours the log).
 */
struct RateSeries {
    std::string name;
    std::vector<double> times;
    std::vector<double> values;
    RateModel model = RateModel::power;
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double amplitude = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double drift = std::numeric_limits<double>::quiet_NaN();
    double residual_ratio = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return times.size(); }
    void push(double t, double v)
    {
        times.push_back(t);
        values.push_back(v);
    }
};

struct RateFit {
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double amplitude = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double drift = std::numeric_limits<double>::quiet_NaN();
    double residual_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need two or more pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return f;
}

/// max/min - 1 of a positive sequence.
inline double variation(const std::vector<double>& v)
{
    if (v.empty()) throw std::invalid_argument("variation: empty sequence");
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (!(*lo > 0.0)) throw std::domain_error("variation: values must be positive");
    return *hi / *lo - 1.0;
}

namespace detail {

// Residual sum of squares of log v - log shape(t) about its mean (one free amplitude).
inline double fixed_shape_rss(const RateSeries& s, const std::function<double(double)>& shape)
{
    std::vector<double> r;
    for (std::size_t i = 0; i < s.size(); ++i) r.push_back(std::log(s.values[i]) - std::log(shape(s.times[i])));
    double m = 0.0;
    for (double v : r) m += v;
    m /= static_cast<double>(r.size());
    double rss = 0.0;
    for (double v : r) rss += (v - m) * (v - m);
    return rss;
}

} // namespace detail

inline RateFit fit_rate(const RateSeries& s, RateModel model, double min_decades = 1.0)
{
    if (s.times.size() != s.values.size()) throw std::invalid_argument("fit_rate: times/values size mismatch");
    if (s.size() < 6) throw std::invalid_argument("fit_rate: at least 6 samples are required");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s.times[i] >= 1.0)) throw std::invalid_argument("fit_rate: times must be >= 1");
        if (i > 0 && !(s.times[i] > s.times[i - 1])) throw std::invalid_argument("fit_rate: times must increase");
        if (!(s.values[i] > 0.0) || !std::isfinite(s.values[i]))
            throw std::invalid_argument("fit_rate: values must be positive and finite");
    }
    const double span = std::log10(s.times.back() / s.times.front());
    if (span < min_decades - 1e-9)
        throw std::invalid_argument("fit_rate: samples span " + std::to_string(span) + " decades, need " +
                                    std::to_string(min_decades));
    RateFit out;
    if (model == RateModel::power) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < s.size(); ++i) {
            lx.push_back(std::log(s.times[i]));
            ly.push_back(std::log(s.values[i]));
        }
        LineFit f = least_squares(lx, ly);
        out.exponent = f.slope;
        out.amplitude = std::exp(f.intercept);
        out.r_squared = f.r_squared;
        return out;
    }
    std::vector<double> q;
    double lsum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = s.times[i];
        q.push_back(s.values[i] * (1.0 + t) / std::log1p(t));
        lsum += std::log(q.back());
    }
    out.amplitude = std::exp(lsum / static_cast<double>(q.size()));
    out.drift = variation(q);
    const double rss_log = detail::fixed_shape_rss(s, [](double t) { return std::log1p(t) / (1.0 + t); });
    const double rss_pow = detail::fixed_shape_rss(s, [](double t) { return 1.0 / (1.0 + t); });
    out.residual_ratio = rss_log > 0.0 ? rss_pow / rss_log : std::numeric_limits<double>::infinity();
    return out;
}

/// Fits in place and stores the result on the series.
inline RateSeries& apply_fit(RateSeries& s, RateModel model, double min_decades = 1.0)
{
    RateFit f = fit_rate(s, model, min_decades);
    s.model = model;
    s.exponent = f.exponent;
    s.amplitude = f.amplitude;
    s.r_squared = f.r_squared;
    s.drift = f.drift;
    s.residual_ratio = f.residual_ratio;
    return s;
}

/// The samples with t0 <= t <= t1.
inline RateSeries restrict_times(const RateSeries& s, double t0, double t1)
{
    RateSeries out;
    out.name = s.name;
    out.model = s.model;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.times[i] >= t0 * (1 - 1e-12) && s.times[i] <= t1 * (1 + 1e-12)) out.push(s.times[i], s.values[i]);
    return out;
}

/// Value at time t (exact match within 1e-9 relative), or throws.
inline double value_at(const RateSeries& s, double t)
{
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::abs(s.times[i] - t) <= 1e-9 * std::max(1.0, t)) return s.values[i];
    throw std::out_of_range("value_at: series " + s.name + " has no sample at t=" + std::to_string(t));
}

} // namespace kdvb
