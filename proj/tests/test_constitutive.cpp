#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "porflow/constitutive.hpp"
#include "support.hpp"

using namespace porflow;
using porflow::fixtures::rel_diff;

namespace {

double trapezoid(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i)
        sum += f(a + i * h);
    return sum * h;
}

} // namespace

TEST(Admissibility, MarginExamples)
{
    EXPECT_DOUBLE_EQ(admissibility_margin(1, 1, 1.5), 1.0);
    EXPECT_DOUBLE_EQ(admissibility_margin(4, 1, 0), 9.0);
    MaterialParams p;
    p.gamma_wn = 1.5;
    EXPECT_DOUBLE_EQ(check_admissibility(p), 1.0);
}

TEST(Admissibility, ZeroMarginRejectedWithValue)
{
    MaterialParams p;
    p.gamma_wn = 2.0;
    try {
        check_admissibility(p);
        FAIL() << "expected rejection";
    } catch (const AdmissibilityError& e) {
        EXPECT_EQ(e.margin(), 0.0);
        EXPECT_NE(std::string(e.what()).find("Assumption 2"), std::string::npos);
    }
}

TEST(Admissibility, RejectsBadCoefficients)
{
    MaterialParams p;
    p.gamma_w = -1.0;
    EXPECT_THROW(check_admissibility(p), std::invalid_argument);
    p = {};
    p.s_eps = 0.5;
    EXPECT_THROW(check_admissibility(p), ValidationError);
    p = {};
    p.eta_n = 0.0;
    EXPECT_THROW(check_admissibility(p), ValidationError);
    p = {};
    p.c_min = 10.0;
    EXPECT_THROW(ConstitutiveModel{p}, AdmissibilityError);
}

TEST(Constitutive, CminDefaultsToMarginAndAcceptsSmallerOverride)
{
    MaterialParams p;
    EXPECT_DOUBLE_EQ(ConstitutiveModel(p).c_min(), 4.0);
    p.c_min = 1.0;
    EXPECT_DOUBLE_EQ(ConstitutiveModel(p).c_min(), 1.0);
}

TEST(Constitutive, ChemicalPotentialMatchesFiniteDifferenceOfEnergy)
{
    MaterialParams p;
    p.gamma_w = 1.3;
    p.gamma_n = 0.7;
    p.gamma_wn = 0.4;
    ConstitutiveModel m(p);
    for (int i = 1; i < 100; ++i) {
        const double s = i / 100.0;
        const double h = 1e-6;
        const double dF = (m.free_energy(s + h) - m.free_energy(s - h)) / (2 * h);
        const double dmu = (m.chemical_potential(s + h) - m.chemical_potential(s - h)) / (2 * h);
        const double d2 = (m.dmu_dS(s + h) - m.dmu_dS(s - h)) / (2 * h);
        EXPECT_LE(rel_diff(dF, m.chemical_potential(s)), 1e-6) << s;
        EXPECT_LE(rel_diff(dmu, m.dmu_dS(s)), 1e-6) << s;
        EXPECT_LE(rel_diff(d2, m.d2mu_dS2(s)), 1e-5) << s;
        EXPECT_NEAR(m.chemical_potential(s), fixtures::oracle::mu(p, s), 1e-13);
    }
}

TEST(Constitutive, PartialPotentialsGiveCapillaryPressure)
{
    ConstitutiveModel m({1.2, 0.8, 0.3});
    for (double s : {0.05, 0.3, 0.5, 0.91}) {
        EXPECT_NEAR(m.phase_potential(s, Phase::wetting) - m.phase_potential(s, Phase::nonwetting),
                    m.chemical_potential(s), 1e-13);
        EXPECT_NEAR(m.capillary_pressure(s), -m.chemical_potential(s), 1e-13);
    }
}

TEST(Constitutive, DomainErrorsOutsideUnitInterval)
{
    ConstitutiveModel m({});
    for (double s : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
        EXPECT_THROW(m.free_energy(s), DomainError);
        EXPECT_THROW(m.chemical_potential(s), DomainError);
        EXPECT_THROW(m.dmu_dS(s), DomainError);
    }
}

TEST(Constitutive, ChemicalPotentialStrictlyIncreasing)
{
    ConstitutiveModel m({1.0, 2.0, 1.4});
    double prev = -INFINITY;
    for (int i = 1; i < 2000; ++i) {
        const double mu = m.chemical_potential(i / 2000.0);
        EXPECT_GT(mu, prev);
        prev = mu;
        EXPECT_GE(m.dmu_dS(i / 2000.0), m.c_min() - 1e-12);
    }
}

TEST(InvertMu, RoundTripOnGrid)
{
    MaterialParams p;
    p.gamma_wn = 1.9;
    ConstitutiveModel m(p);
    for (int i = 0; i < 1000; ++i) {
        const double s = p.s_eps + (1.0 - 2.0 * p.s_eps) * i / 999.0;
        EXPECT_LE(std::abs(m.invert_mu(m.chemical_potential(s)) - s), 1e-12) << s;
    }
}

TEST(InvertMu, ExtremePotentialsStayInside)
{
    ConstitutiveModel m({});
    for (double mu : {-700.0, -60.0, -30.0, 30.0, 60.0, 700.0}) {
        const double s = m.invert_mu(mu);
        EXPECT_GT(s, 0.0);
        EXPECT_LT(s, 1.0);
    }
    EXPECT_NEAR(m.invert_mu(-30.0), fixtures::oracle::saturation({}, -30.0), 1e-20);
    EXPECT_NEAR(m.invert_mu(0.0), 0.5, 1e-15);
    EXPECT_THROW(m.invert_mu(std::nan("")), DomainError);
}

TEST(InvertMu, MatchesBisectionOracle)
{
    MaterialParams p{0.6, 1.7, 0.9};
    ConstitutiveModel m(p);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    for (int i = 0; i < 200; ++i) {
        const double mu = u(rng);
        EXPECT_NEAR(m.invert_mu(mu), fixtures::oracle::saturation(p, mu), 1e-14) << mu;
    }
}

TEST(Mobility, ClampedAndMonotone)
{
    MaterialParams p;
    p.eta_w = 2.0;
    p.eta_n = 0.5;
    ConstitutiveModel m(p);
    EXPECT_DOUBLE_EQ(m.mobility(0.01, Phase::wetting), m.mobility(0.1, Phase::wetting));
    EXPECT_DOUBLE_EQ(m.mobility(0.99, Phase::nonwetting), m.mobility(0.9, Phase::nonwetting));
    EXPECT_DOUBLE_EQ(m.mobility(0.3, Phase::wetting), 0.09 / 2.0);
    EXPECT_DOUBLE_EQ(m.mobility(0.3, Phase::nonwetting), 0.49 / 0.5);
    EXPECT_EQ(m.dmobility_dS(0.05, Phase::wetting), 0.0);
    EXPECT_EQ(m.dmobility_dS(0.95, Phase::nonwetting), 0.0);
    for (int i = 1; i < 100; ++i) {
        const double s = i / 100.0;
        for (Phase ph : {Phase::wetting, Phase::nonwetting}) {
            EXPECT_GE(m.mobility(s, ph), m.lambda_min() - 1e-15);
            EXPECT_LE(m.mobility(s, ph), m.lambda_max() + 1e-15);
        }
        EXPECT_GE(m.total_mobility(s), 2.0 * m.lambda_min() - 1e-15);
    }
    const double h = 1e-7;
    for (double s : {0.2, 0.5, 0.7}) {
        for (Phase ph : {Phase::wetting, Phase::nonwetting}) {
            const double fd = (m.mobility(s + h, ph) - m.mobility(s - h, ph)) / (2 * h);
            EXPECT_NEAR(fd, m.dmobility_dS(s, ph), 1e-7);
        }
    }
}

TEST(Mobility, LinearKind)
{
    ConstitutiveModel m({}, RelPermKind::linear);
    EXPECT_DOUBLE_EQ(m.mobility(0.3, Phase::wetting), 0.3);
    EXPECT_DOUBLE_EQ(m.mobility(0.3, Phase::nonwetting), 0.7);
    EXPECT_EQ(parse_rel_perm_kind("linear"), RelPermKind::linear);
    EXPECT_THROW(parse_rel_perm_kind("cubic"), std::invalid_argument);
}

TEST(Constitutive, LipschitzBoundsAreExtremaOnRange)
{
    ConstitutiveModel m({2.0, 1.0, 0.5});
    const auto [lo, hi] = m.lipschitz_bounds();
    double mn = INFINITY, mx = -INFINITY;
    for (int i = 0; i <= 100000; ++i) {
        const double s = 0.1 + 0.8 * i / 100000.0;
        mn = std::min(mn, m.dmu_dS(s));
        mx = std::max(mx, m.dmu_dS(s));
    }
    EXPECT_NEAR(lo, mn, 1e-8);
    EXPECT_NEAR(hi, mx, 1e-12);
}

TEST(ConvexityGap, NonPositiveOnRandomPairs)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> g(0.1, 3.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        MaterialParams p{g(rng), g(rng), 0.0};
        p.gamma_wn = 0.45 * std::pow(std::sqrt(p.gamma_w) + std::sqrt(p.gamma_n), 2) * u(rng);
        ConstitutiveModel m(p);
        for (int i = 0; i < 500; ++i) {
            const double s0 = 0.01 + 0.98 * u(rng);
            const double s1 = 0.01 + 0.98 * u(rng);
            EXPECT_LE(m.convexity_gap(s0, s1, m.chemical_potential(s1)), 1e-14);
        }
        EXPECT_EQ(m.convexity_gap(0.4, 0.4, m.chemical_potential(0.4)), 0.0);
    }
}

TEST(PressureTransforms, MatchTrapezoidOracle)
{
    MaterialParams p{1.0, 1.5, 0.6};
    ConstitutiveModel m(p);
    auto shift_integrand = [&](double s) {
        return m.mobility(s, Phase::wetting) / m.total_mobility(s) * m.dmu_dS(s);
    };
    auto theta_integrand = [&](double s) {
        return m.mobility(s, Phase::wetting) * m.mobility(s, Phase::nonwetting) / m.total_mobility(s) *
               m.dmu_dS(s);
    };
    for (double s : {0.15, 0.4, 0.75, 0.9}) {
        EXPECT_NEAR(m.artificial_pressure_shift(s), trapezoid(shift_integrand, 0.1, s, 200000), 1e-8);
        EXPECT_NEAR(m.complementary_pressure(s), trapezoid(theta_integrand, 0.1, s, 200000), 1e-8);
    }
    EXPECT_EQ(m.complementary_pressure(p.s_eps), 0.0);
    EXPECT_EQ(m.artificial_pressure_shift(p.s_eps), 0.0);
    // Below s_eps the saturation is clamped.
    EXPECT_EQ(m.complementary_pressure(0.05), 0.0);
}

TEST(PressureTransforms, SymmetricMidpointAndUpperEndMatchFineTrapezoid)
{
    MaterialParams p{1.0, 1.0, 0.5};
    ConstitutiveModel m(p);
    auto shift_integrand = [&](double s) {
        return m.mobility(s, Phase::wetting) / m.total_mobility(s) * m.dmu_dS(s);
    };
    auto theta_integrand = [&](double s) {
        return m.mobility(s, Phase::wetting) * m.mobility(s, Phase::nonwetting) / m.total_mobility(s) *
               m.dmu_dS(s);
    };
    const double top = 1.0 - p.s_eps;
    EXPECT_NEAR(m.artificial_pressure_shift(0.5), trapezoid(shift_integrand, p.s_eps, 0.5, 1000000), 1e-8);
    EXPECT_NEAR(m.complementary_pressure(0.5), trapezoid(theta_integrand, p.s_eps, 0.5, 1000000), 1e-8);
    EXPECT_NEAR(m.complementary_pressure(top), trapezoid(theta_integrand, p.s_eps, top, 1000000), 1e-8);
    EXPECT_NEAR(m.artificial_pressure_shift(top), trapezoid(shift_integrand, p.s_eps, top, 1000000), 1e-8);
}

TEST(AdaptiveSimpson, PolynomialExactAndRefines)
{
    EXPECT_NEAR(adaptive_simpson([](double x) { return x * x * x; }, 0.0, 2.0, 1e-12), 4.0, 1e-14);
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(3.0 * x); }, 0.0, 1.0, 1e-10),
                (std::exp(3.0) - 1.0) / 3.0, 1e-9);
    // Unbounded derivative at the left end exhausts the interval floor.
    EXPECT_THROW(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10), ConvergenceError);
}
