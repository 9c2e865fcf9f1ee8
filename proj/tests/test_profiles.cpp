#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kdvb/fft.hpp"
#include "kdvb/profiles.hpp"

using namespace kdvb;

namespace {

double quad_all(const std::function<double(double)>& f, double tol = 1e-13)
{
    return adaptive_quad(f, -INFINITY, 0.0, tol) + adaptive_quad(f, 0.0, INFINITY, tol);
}

// exp((b/2) * quadrature of chi_star over (-inf, x])
double eta_star_by_quadrature(double x, double b, double delta)
{
    const double I = adaptive_quad([&](double y) { return chi_star(y, b, delta); }, -INFINITY, x, 1e-12);
    return std::exp(0.5 * b * I);
}

// Z(x,t) by direct y-quadrature of d_x(G(x-y,t) eta(x,t)) m(y)
double Z_direct(double x, double t, const ProfileContext& ctx)
{
    const double e = eta(x, t, ctx), ex = eta_x(x, t, ctx.b(), ctx.delta);
    auto integrand = [&](double y) {
        const double G = heat_kernel(x - y, t);
        const double Gx = -(x - y) / (2.0 * t) * G;
        const double c = y > 0.0 ? ctx.c_plus : ctx.c_minus;
        return (Gx * e + G * ex) * c * std::pow(1.0 + std::abs(y), 1.0 - ctx.alpha);
    };
    return adaptive_quad(integrand, -INFINITY, 0.0, 1e-13) + adaptive_quad(integrand, 0.0, INFINITY, 1e-13);
}

} // namespace

TEST(TotalMass, ClosedFormsAndQuadratureOracle)
{
    EXPECT_EQ(total_mass(InitialDatum::zero()), 0.0);
    EXPECT_NEAR(total_mass(InitialDatum::gaussian(0.3)), 0.6 * sqrt_pi, 1e-14);

    auto u0 = InitialDatum::algebraic(0.1, 1.5);
    const double delta = total_mass(u0);
    const double q = quad_all([&](double x) { return u0.value(x); }, 1e-12);
    EXPECT_NEAR(delta, q, 1e-8);
    // second route: truncated integrals at L and 2L, algebraic tail removed by extrapolation
    const double L = 1e4, r = std::pow(2.0, 0.5);
    const double I1 = adaptive_quad([&](double x) { return u0.value(x); }, -L, L, 1e-12);
    const double I2 = adaptive_quad([&](double x) { return u0.value(x); }, -2 * L, 2 * L, 1e-12);
    EXPECT_NEAR(delta, (r * I2 - I1) / (r - 1.0), 1e-8);
    EXPECT_THROW(InitialDatum::algebraic(0.1, 1.0), std::invalid_argument);
}

TEST(Datum, CumulativeAndTailsMatchQuadrature)
{
    for (double eps : {0.0, 0.3, -0.5}) {
        auto u0 = InitialDatum::algebraic(0.1, 1.3, eps);
        for (double x : {-50.0, -3.0, 0.0, 0.7, 20.0}) {
            const double left = adaptive_quad([&](double y) { return u0.value(y); }, -INFINITY, x, 1e-13);
            const double right = adaptive_quad([&](double y) { return u0.value(y); }, x, INFINITY, 1e-13);
            EXPECT_NEAR(u0.cumulative(x), left, 1e-9) << eps << " " << x;
            EXPECT_NEAR(u0.upper_tail(x), right, 1e-9) << eps << " " << x;
        }
    }
    auto g = InitialDatum::gaussian(0.2);
    EXPECT_NEAR(g.cumulative(1.0), adaptive_quad([&](double y) { return g.value(y); }, -INFINITY, 1.0, 1e-14), 1e-12);
}

TEST(Datum, DecayBoundAndWindow)
{
    auto u0 = InitialDatum::algebraic(0.1, 1.5, 0.3);
    const double C = u0.bound_constant();
    for (double x = -500; x <= 500; x += 0.37) EXPECT_LE(std::abs(u0.value(x)), C * std::pow(1 + std::abs(x), -1.5));
    Grid1D g(100.0, 1024);
    RealField w = u0.sample(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        if (std::abs(x) >= 98.0) {
            EXPECT_EQ(w[j], 0.0);
        }
        if (std::abs(x) <= 90.0) {
            EXPECT_EQ(w[j], u0.value(x));
        }
    }
}

TEST(ChiStar, ExamplesAndNormalisation)
{
    for (double x : {-3.0, 0.0, 2.0}) EXPECT_EQ(chi_star(x, 1.0, 0.0), 0.0);
    EXPECT_LT(std::abs(chi_star(30.0, 1.0, 1.0)), 1e-90);
    EXPECT_NEAR(quad_all([](double x) { return chi_star(x, 1.0, 1.0); }), 1.0, 1e-8);
    EXPECT_NEAR(quad_all([](double x) { return chi_star(x, -2.0, 0.3); }), 0.3, 1e-8);
}

TEST(Chi, ScalingAndMass)
{
    for (double x : {-2.0, 0.5, 4.0}) {
        EXPECT_EQ(chi(x, 0.0, 1.0, 1.0), chi_star(x, 1.0, 1.0));
        EXPECT_EQ(chi(x, 5.0, 1.0, 0.0), 0.0);
    }
    EXPECT_NEAR(quad_all([](double x) { return std::abs(chi(x, 3.0, 1.0, 1.0)); }), 1.0, 1e-8);
    for (double t : {0.0, 1.0, 10.0, 100.0})
        EXPECT_NEAR(quad_all([&](double x) { return chi(x, t, 1.0, 0.5); }), 0.5, 1e-7);
    for (double t : {0.5, 3.0, 99.0})
        for (double s : {-3.0, -0.2, 1.7}) {
            const double r = std::sqrt(1.0 + t);
            EXPECT_NEAR(r * chi(r * s, t, 1.0, 0.7), chi_star(s, 1.0, 0.7), 1e-15);
        }
}

TEST(Chi, GaussianPointwiseBound)
{
    const double b = 1.0, delta = 0.8;
    double C = 0.0;
    for (double x = -30; x <= 30; x += 0.01)
        C = std::max(C, std::abs(chi(x, 0.0, b, delta)) / (std::abs(delta) * std::exp(-x * x / 4.0)));
    for (double t : {1.0, 10.0, 100.0})
        for (double x = -300; x <= 300; x += 0.05) {
            const double bound = C * delta / std::sqrt(1 + t) * std::exp(-x * x / (4 * (1 + t)));
            EXPECT_LE(std::abs(chi(x, t, b, delta)), bound * (1 + 1e-12) + 1e-300);
        }
}

TEST(EtaStar, ClosedFormMatchesDefiningQuadrature)
{
    const double cases[3][2] = {{1.0, 1.0}, {1.0, -0.5}, {-2.0, 0.3}};
    for (auto& c : cases)
        for (double x : {-10.0, -1.0, 0.0, 1.0, 10.0})
            EXPECT_NEAR(eta_star(x, c[0], c[1]), eta_star_by_quadrature(x, c[0], c[1]), 1e-9) << c[0] << c[1] << x;
}

TEST(EtaStar, LimitsAndBounds)
{
    for (double x : {-5.0, 0.0, 5.0}) EXPECT_EQ(eta_star(x, 1.0, 0.0), 1.0);
    EXPECT_NEAR(eta_star(-40.0, 1.0, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(eta_star(40.0, 1.0, 1.0), std::exp(0.5), 1e-14);
    for (double delta : {-1.0, -0.3, 0.4, 1.0})
        for (double b : {1.0, -1.5}) {
            const double lo = std::min(1.0, std::exp(0.5 * b * delta)), hi = std::max(1.0, std::exp(0.5 * b * delta));
            for (double x = -30; x <= 30; x += 0.1)
                for (double t : {0.0, 10.0}) {
                    const double e = eta(x, t, b, delta);
                    EXPECT_GE(e, lo * (1 - 1e-15));
                    EXPECT_LE(e, hi * (1 + 1e-15));
                }
        }
}

TEST(EtaStar, CumulativeIsLogEta)
{
    for (double x : {-25.0, -3.0, 0.0, 2.0, 30.0}) {
        const double q = adaptive_quad([](double y) { return chi_star(y, 1.0, 0.5); }, -INFINITY, x, 1e-14);
        EXPECT_NEAR(chi_star_cumulative(x, 1.0, 0.5), q, 1e-12);
        EXPECT_NEAR(chi_star_cumulative(x, 1.0, 0.5), 2.0 * std::log(eta_star(x, 1.0, 0.5)), 1e-12);
        EXPECT_NEAR(chi_star_upper_tail(x, 1.0, 0.5) + chi_star_cumulative(x, 1.0, 0.5), 0.5, 1e-14);
    }
}

TEST(DConstant, ExamplesAndGolden)
{
    EXPECT_EQ(d_constant(1.0, 0.0), 0.0);
    const double d = d_constant(1.0, 1.0);
    EXPECT_GT(d, 0.0);
    // second route: trapezoid on a fine wide grid (spectrally accurate for Gaussian decay)
    double trap = 0.0;
    const double h = 0.01;
    for (double y = -40; y <= 40; y += h) {
        const double c = chi_star(y, 1.0, 1.0);
        trap += h * c * c * c / eta_star(y, 1.0, 1.0);
    }
    EXPECT_NEAR(d, trap, 1e-9);
    EXPECT_NEAR(d, 0.0357429573506590393574, 1e-10);
    EXPECT_NEAR(d_constant(1.0, 0.5), 0.0050668142889560927387, 1e-11);
}

TEST(VProfile, VanishingCasesAndDualForm)
{
    auto ctx = make_context(ModelParams(1.0, -3.0 / 8.0, 1.0), 1.0, 2.0, 0.0, 0.0);
    EXPECT_EQ(ctx.params.dispersion_factor(), 0.0);
    for (double x : {-3.0, 0.0, 2.0}) EXPECT_EQ(V_profile(x, 10.0, ctx), 0.0);
    auto ctx2 = make_context(ModelParams(1.0, 0.0, 1.0), 1.0, 2.0, 0.0, 0.0);
    EXPECT_EQ(V_profile(1.0, 0.0, ctx2), 0.0);
    EXPECT_NE(V_profile(0.3, 10.0, ctx2), 0.0);
    auto ctx3 = make_context(ModelParams(1.0, 0.0, 1.0), 0.0, 2.0, 0.0, 0.0);
    EXPECT_EQ(V_profile(0.3, 10.0, ctx3), 0.0);

    // finite-difference oracle for 2 d/dx (eta_star e^{-x^2/4}) at x = 0, Richardson-extrapolated
    auto g = [](double x) { return eta_star(x, 1.0, 1.0) * std::exp(-0.25 * x * x); };
    auto cd = [&](double h) { return (g(h) - g(-h)) / (2 * h); };
    const double h = 1e-2;
    const double fd = (4 * cd(h / 2) - cd(h)) / 3.0;
    EXPECT_NEAR(V_star(0.0, 1.0, 1.0), 2.0 * fd, 1e-9);
}

TEST(VProfile, DualFormOnWideGrid)
{
    Grid1D g(60.0, 4096);
    for (auto [b, delta] : {std::pair{1.0, 1.0}, std::pair{-2.0, 0.3}, std::pair{1.0, -0.5}}) {
        RealField e = RealField::sample(g, [&](double x) { return eta_star(x, b, delta) * std::exp(-0.25 * x * x); });
        RealField de = spectral_derivative(e, 1);
        double gap = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) gap = std::max(gap, std::abs(V_star(g.x(j), b, delta) - 2.0 * de[j]));
        EXPECT_LE(gap, 1e-8);
    }
}

TEST(Z0, VanishesForDiffusionWaveDatum)
{
    auto ctx = make_context(ModelParams(1.0, 0.0, 0.0), 0.6, 1.5, 0.0, 0.0);
    auto u0 = InitialDatum::diffusion_wave(1.0, 0.6, 1.5);
    for (double x : {-20.0, -1.0, 0.0, 3.0, 50.0}) {
        EXPECT_NEAR(z0_datum(u0, ctx, x), 0.0, 1e-15);
        EXPECT_NEAR(w0_datum(u0, ctx, x), 0.0, 1e-15);
    }
}

TEST(Z0, DecayBoundAndTailStabilisation)
{
    auto u0 = InitialDatum::algebraic(0.1, 1.5);
    auto ctx = make_context(ModelParams(1.0, 0.0, 1.0), total_mass(u0), 1.5, 0.0, 0.0);
    double Cz = 0.0, Cw = 0.0;
    for (double x = -2000; x <= 2000; x += 1.3) {
        Cz = std::max(Cz, std::abs(z0_datum(u0, ctx, x)) * std::pow(1 + std::abs(x), 0.5));
        Cw = std::max(Cw, std::abs(w0_datum(u0, ctx, x)) * std::pow(1 + std::abs(x), 0.5));
    }
    EXPECT_LT(Cz, 1.0);
    EXPECT_LT(Cw, 1.0);
    EXPECT_LT(std::abs(z0_datum(u0, ctx, 1e8)), 1e-4);
    EXPECT_LT(std::abs(w0_datum(u0, ctx, 1e8)), 1e-4);
    const double a = z0_datum(u0, ctx, 10.0) * std::sqrt(11.0);
    const double b = z0_datum(u0, ctx, 40.0) * std::sqrt(41.0);
    EXPECT_LE(std::abs(a - b), 0.1 * std::abs(b));
}

TEST(TailLimits, DiffusionWaveDatumGivesZero)
{
    auto ctx = make_context(ModelParams(1.0, 0.0, 0.0), 0.6, 1.5, 0.0, 0.0);
    auto u0 = InitialDatum::diffusion_wave(1.0, 0.6, 1.5);
    auto tl = tail_limits([&](double x) { return z0_datum(u0, ctx, x); }, 1.5, 400.0);
    EXPECT_NEAR(tl.c_plus, 0.0, 1e-14);
    EXPECT_NEAR(tl.c_minus, 0.0, 1e-14);
}

TEST(TailLimits, AlgebraicFamilyMatchesAsymptotics)
{
    for (double alpha : {1.2, 1.5, 2.0})
        for (double eps : {0.0, 0.3}) {
            const double A = 0.1, b = 1.0;
            auto u0 = InitialDatum::algebraic(A, alpha, eps);
            auto ctx = context_for_datum(ModelParams(b, 0.0, 1.0), u0, 400.0);
            const double cp = -std::exp(-0.5 * b * ctx.delta) * A * (1 + eps) / (alpha - 1);
            const double cm = A * (1 - eps) / (alpha - 1);
            EXPECT_NEAR(ctx.c_plus, cp, 1e-4 * std::abs(cp)) << alpha << " " << eps;
            EXPECT_NEAR(ctx.c_minus, cm, 1e-4 * std::abs(cm)) << alpha << " " << eps;
            EXPECT_LE(ctx.c_plus_error, 0.05 * std::abs(ctx.c_plus));
            // the two sides are not mirror images: eta_star^{-1} weights them differently
            EXPECT_GT(std::abs(std::abs(ctx.c_plus) - std::abs(ctx.c_minus)), 1e-3);
        }
}

TEST(TailLimits, OddCompactBumpGivesZero)
{
    Grid1D g(200.0, 4096);
    const double b = 1.0, delta = 0.4;
    RealField s = RealField::sample(g, [&](double x) {
        const double bump = std::abs(x) < 3.0 ? x * std::exp(-1.0 / (9.0 - x * x)) : 0.0;
        return chi_star(x, b, delta) + bump;
    });
    auto u0 = InitialDatum::samples(s, 1.5);
    auto ctx = make_context(ModelParams(b, 0.0, 0.0), total_mass(u0), 1.5, 0.0, 0.0);
    auto tl = tail_limits([&](double x) { return z0_datum(u0, ctx, x); }, 1.5, 200.0);
    EXPECT_NEAR(tl.c_plus, 0.0, 1e-10);
    EXPECT_NEAR(tl.c_minus, 0.0, 1e-10);
}

TEST(TailLimits, NonStabilisingSequenceIsRejected)
{
    EXPECT_THROW(tail_limits([](double x) { return std::sin(std::log(std::abs(x))) / std::sqrt(std::abs(x)); }, 1.5,
                             400.0),
                 std::runtime_error);
}

TEST(ZProfile, ZeroTailsGiveZero)
{
    auto ctx = make_context(ModelParams(1.0, 0.0, 1.0), 0.5, 1.5, 0.0, 0.0);
    for (double x : {-5.0, 0.0, 3.0}) EXPECT_EQ(Z_profile(x, 10.0, ctx), 0.0);
    EXPECT_THROW(Z_profile(0.0, 0.0, ctx), std::invalid_argument);
}

TEST(ZProfile, OddTailsMatchLeadingTermAtLargeTime)
{
    auto ctx = make_context(ModelParams(1.0, 0.0, 0.0), 0.0, 1.5, 1.0, -1.0);
    const double t = 1e4;
    const double lead = 2.0 / (4.0 * sqrt_pi) * std::pow(2.0, 0.5) * kdvb::gamma(0.75) * std::pow(t, -0.75);
    EXPECT_NEAR(Z_profile(0.0, t, ctx), lead, 0.03 * lead);
}

TEST(ZProfile, ProductRuleSplitMatchesDirectQuadrature)
{
    auto ctx = make_context(ModelParams(1.0, 0.2, 1.0), 0.6, 1.5, -0.17, 0.21);
    EXPECT_NEAR(Z_profile(1.3, 10.0, ctx), Z_direct(1.3, 10.0, ctx), 1e-7);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(-30.0, 30.0), ut(1.0, 200.0);
    for (int i = 0; i < 5; ++i) {
        const double x = ux(rng), t = ut(rng);
        EXPECT_NEAR(Z_profile(x, t, ctx), Z_direct(x, t, ctx), 1e-7) << x << " " << t;
    }
}

TEST(BetaConstants, Examples)
{
    auto z = make_context(ModelParams(1.0, 0.0, 0.0), 0.0, 1.5, 0.0, 0.0);
    EXPECT_EQ(beta_constants(z).beta0, 0.0);
    EXPECT_EQ(beta_constants(z).beta1, 0.0);
    auto odd = make_context(ModelParams(1.0, 0.0, 1.0), 0.0, 1.5, 1.0, -1.0);
    EXPECT_NEAR(beta_constants(odd).beta0, 2.0 * kdvb::gamma(0.75), 1e-14);
    auto two = make_context(ModelParams(1.0, 0.0, 0.0), 0.5, 2.0, 1.0, 1.0);
    EXPECT_NEAR(two.beta1, 1.0, 1e-15);
    EXPECT_THROW(beta_constants(two), std::domain_error);
    EXPECT_FALSE(two.beta0.has_value());
}

TEST(ZLeadingCoefficient, Examples)
{
    auto z = make_context(ModelParams(1.0, 0.0, 0.0), 0.0, 1.5, 0.0, 0.0);
    EXPECT_EQ(Z_leading_coefficient(z), 0.0);
    auto odd = make_context(ModelParams(1.0, 0.0, 1.0), 0.0, 1.5, 1.0, -1.0);
    EXPECT_NEAR(Z_leading_coefficient(odd), std::pow(2.0, 0.5) * 2.0 * kdvb::gamma(0.75) / (4.0 * sqrt_pi), 1e-14);
}

TEST(ZLeadingCoefficient, LargeTimeLimitForAntisymmetricTails)
{
    // c_plus + c_minus = 0 removes the t^{-1} correction inside the bracket
    for (double delta : {0.0, 0.5})
        for (double alpha : {1.2, 1.5, 1.8}) {
            auto ctx = make_context(ModelParams(1.0, 0.0, 1.0), delta, alpha, 0.3, -0.3);
            const double coef = Z_leading_coefficient(ctx);
            const double t = 1e4;
            EXPECT_NEAR(std::pow(t, 0.5 * alpha) * Z_profile(0.0, t, ctx), coef, 0.05 * std::abs(coef))
                << delta << " " << alpha;
        }
}
