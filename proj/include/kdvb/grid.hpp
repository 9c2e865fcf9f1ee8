#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdvb {

/// Uniform periodic grid on [-L, L) with n points, x_j = -L + j*dx.
class Grid1D {
public:
    Grid1D() = default;
    Grid1D(double half_width, std::size_t n_points) : L_(half_width), n_(n_points)
    {
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw std::invalid_argument("Grid1D: half width must be positive, got " +
                                        std::to_string(half_width));
        if (n_points < 16 || (n_points & (n_points - 1)) != 0)
            throw std::invalid_argument("Grid1D: n_points must be a power of two >= 16, got " +
                                        std::to_string(n_points));
    }

    double half_width() const { return L_; }
    std::size_t size() const { return n_; }
    double dx() const { return 2.0 * L_ / static_cast<double>(n_); }
    double x(std::size_t j) const { return -L_ + static_cast<double>(j) * dx(); }

    std::vector<double> points() const
    {
        std::vector<double> xs(n_);
        for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
        return xs;
    }

    /// Signed mode index of slot j in FFT ordering; the Nyquist slot n/2 maps to +n/2.
    long mode(std::size_t j) const
    {
        return j <= n_ / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n_);
    }
    bool is_nyquist(std::size_t j) const { return j == n_ / 2; }
    double wavenumber(std::size_t j) const { return std::numbers::pi * static_cast<double>(mode(j)) / L_; }

    bool operator==(const Grid1D& o) const { return L_ == o.L_ && n_ == o.n_; }

private:
    double L_ = 1.0;
    std::size_t n_ = 16;
};

struct RealField {
    Grid1D grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(const Grid1D& g) : grid(g), values(g.size(), 0.0) {}
    RealField(const Grid1D& g, std::vector<double> v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.size())
            throw std::invalid_argument("RealField: sample count does not match grid");
    }

    template <class F>
    static RealField sample(const Grid1D& g, F&& f)
    {
        RealField out(g);
        for (std::size_t j = 0; j < g.size(); ++j) out.values[j] = f(g.x(j));
        return out;
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    bool all_finite() const
    {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

struct SpectralCoeffs {
    Grid1D grid;
    std::vector<std::complex<double>> coeffs;
};

inline double sup_norm(const RealField& f)
{
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double l2_norm(const RealField& f)
{
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.dx());
}

/// Trapezoid integral; exact for the trigonometric interpolant on a periodic grid.
inline double integral(const RealField& f)
{
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.dx();
}

/// Sup of |f| over points with |x| <= frac*L.
inline double interior_sup(const RealField& f, double frac = 0.8)
{
    double m = 0.0;
    const double lim = frac * f.grid.half_width();
    for (std::size_t j = 0; j < f.size(); ++j)
        if (std::abs(f.grid.x(j)) <= lim) m = std::max(m, std::abs(f[j]));
    return m;
}

/// Sup of |f| over points with |x| >= frac*L.
inline double outer_sup(const RealField& f, double frac = 0.9)
{
    double m = 0.0;
    const double lim = frac * f.grid.half_width();
    for (std::size_t j = 0; j < f.size(); ++j)
        if (std::abs(f.grid.x(j)) >= lim) m = std::max(m, std::abs(f[j]));
    return m;
}

} // namespace kdvb
