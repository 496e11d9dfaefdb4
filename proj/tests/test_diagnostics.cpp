#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fstirap/diagnostics.hpp"

using namespace fstirap;

namespace {

constexpr double kPi = std::numbers::pi;

PulseSpec spec(double omega0, double tau, double alpha = kPi / 4)
{
    PulseSpec p;
    p.omega0 = omega0;
    p.delay_tau = tau;
    p.mix_alpha = alpha;
    return p;
}

} // namespace

TEST(Diagnostics, CouplingExtrema)
{
    const auto e = coupling_extrema(spec(20.0, 0.7));
    EXPECT_EQ(e.t_max, 0.0);
    EXPECT_NEAR(e.theta_dot_max, 1.4 * std::tan(kPi / 8), 1e-14);
    EXPECT_NEAR(e.omega_at_tmax, 40.0 * std::exp(-0.49) * std::cos(kPi / 8), 1e-12);
    EXPECT_NEAR(e.theta_dot_max, theta_dot_analytic(spec(20.0, 0.7), 0.0), 1e-14);
    EXPECT_NEAR(e.omega_at_tmax, omega_rms_analytic(spec(20.0, 0.7), 0.0), 1e-12);
}

TEST(Diagnostics, WidthsMatchNumericalHalfMaxima)
{
    const PulseSpec p = spec(20.0, 0.7);
    const auto w = coupling_widths(p);
    // half-maximum crossings of theta_dot are symmetric about t = 0
    const double half = 0.5 * theta_dot_analytic(p, 0.0);
    double lo = 0.0;
    double hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (theta_dot_analytic(p, mid) > half ? lo : hi) = mid;
    }
    EXPECT_NEAR(2.0 * lo, w.width_theta, 1e-10);
    EXPECT_NEAR(w.width_omega, 1.4 + 2.0 * std::sqrt(std::log(2.0)), 1e-14);
    EXPECT_TRUE(std::isinf(coupling_widths(spec(20.0, 0.0)).width_theta));
}

TEST(Diagnostics, TauLowerBound)
{
    EXPECT_NEAR(tau_lower_bound(spec(20.0, 0.7, kPi / 4)), 0.350, 0.005);
    EXPECT_NEAR(tau_lower_bound(spec(20.0, 0.7, kPi / 2)), 0.293, 0.005);
    // at the bound the two widths coincide
    PulseSpec p = spec(20.0, 0.0);
    p.delay_tau = tau_lower_bound(p);
    const auto w = coupling_widths(p);
    EXPECT_NEAR(w.width_theta, w.width_omega, 1e-12);
    // independent of Omega0
    EXPECT_EQ(tau_lower_bound(spec(5.0, 0.7)), tau_lower_bound(spec(50.0, 0.7)));
}

TEST(Diagnostics, TauUpperBoundSolvesDefiningEquation)
{
    for (double omega0 : {10.0, 20.0, 40.0, 60.0}) {
        for (double alpha : {kPi / 8, kPi / 4, kPi / 2}) {
            const PulseSpec p = spec(omega0, 0.7, alpha);
            const auto root = tau_upper_root(p);
            ASSERT_TRUE(root.has_value());
            const double h = 0.5 * alpha;
            const double rhs = 2.0 * 5.0 * std::sin(h) / (std::cos(h) * std::cos(h)) * *root * std::exp(*root * *root);
            EXPECT_NEAR(rhs, omega0, 1e-9 * omega0);
        }
    }
    EXPECT_NEAR(*tau_upper_root(spec(20.0, 0.7)), 1.16, 0.01);
}

TEST(Diagnostics, TauUpperBoundMonotoneInOmega)
{
    double prev = 0.0;
    for (double omega0 = 1.0; omega0 <= 200.0; omega0 *= 1.3) {
        const double r = *tau_upper_root(spec(omega0, 0.7));
        EXPECT_GT(r, prev);
        prev = r;
    }
    EXPECT_LT(*tau_upper_root(spec(20.0, 0.7), 10.0), *tau_upper_root(spec(20.0, 0.7), 5.0));
}

TEST(Diagnostics, TauUpperBoundEdgeCases)
{
    EXPECT_FALSE(tau_upper_root(spec(20.0, 0.7, 0.0)).has_value());
    EXPECT_TRUE(std::isinf(tau_upper_bound(spec(20.0, 0.7, 0.0))));
    EXPECT_EQ(*tau_upper_root(spec(0.0, 0.7)), 0.0);
    EXPECT_THROW(tau_upper_bound(spec(1.0, 0.7)), NoAdiabaticWindow);
    EXPECT_NO_THROW(tau_upper_bound(spec(20.0, 0.7)));
    EXPECT_THROW(tau_upper_root(spec(20.0, 0.7), 0.5), ConfigError);
}

TEST(Diagnostics, DeltaBound)
{
    EXPECT_NEAR(delta_bound(spec(40.0, 0.7)), 176.77, 0.01);
    const double ratio = delta_bound(spec(40.0, 0.7, kPi / 4)) / delta_bound(spec(40.0, 0.7, kPi / 2));
    EXPECT_NEAR(ratio, 4.12, 0.01);
    // quadratic in Omega0
    EXPECT_NEAR(delta_bound(spec(80.0, 0.7)) / delta_bound(spec(40.0, 0.7)), 4.0, 1e-12);
    EXPECT_TRUE(std::isinf(delta_bound(spec(40.0, 0.0))));
    EXPECT_TRUE(std::isinf(delta_bound(spec(40.0, 0.7, 0.0))));
}

TEST(Diagnostics, DetuningAngle)
{
    EXPECT_NEAR(detuning_angle(1.0, 0.0), kPi / 4, 1e-15);
    EXPECT_NEAR(detuning_angle(1e-3, 10.0), detuning_angle_approx(1e-3, 10.0), 1e-10);
}

TEST(Diagnostics, RiskAtPeak)
{
    EXPECT_FALSE(nonadiabatic_risk(spec(20.0, 0.7), 0.0).at_risk());
    const auto weak = nonadiabatic_risk(spec(1.0, 1.5), 0.0);
    EXPECT_TRUE(weak.adiabaticity_violated);
    EXPECT_TRUE(weak.coupling_appreciable);
    EXPECT_FALSE(nonadiabatic_risk(spec(1.0, 0.1), 0.0).coupling_appreciable);
}

TEST(Diagnostics, DetunedRiskSharpensWithDetuning)
{
    const PulseSpec p = spec(40.0, 0.7);
    EXPECT_FALSE(nonadiabatic_risk_detuned(p, 0.0, 0.0).adiabaticity_violated);
    EXPECT_TRUE(nonadiabatic_risk_detuned(p, 1e5, 0.0).adiabaticity_violated);
}

TEST(Diagnostics, ExactBoundAgreesWithSmallAngleBound)
{
    // The detuning bound comes from the small-angle detuned condition at the
    // coupling peak; with the exact detuning angle the two boundaries agree
    // whenever Delta_max >> Omega(0).
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int k = 0; k < 500; ++k) {
        const PulseSpec p = spec(20.0 + 180.0 * u(rng), 0.35 + 0.8 * u(rng), 0.2 + 1.3 * u(rng));
        const double dmax = delta_bound(p);
        const double omega = omega_rms_analytic(p, 0.0);
        if (dmax < 20.0 * omega)
            continue;
        ++compared;
        EXPECT_FALSE(nonadiabatic_risk_detuned(p, 0.9 * dmax, 0.0).adiabaticity_violated);
        EXPECT_TRUE(nonadiabatic_risk_detuned(p, 1.1 * dmax, 0.0).adiabaticity_violated);
    }
    EXPECT_GT(compared, 20);
}

TEST(Diagnostics, ReportVerdicts)
{
    const auto ok = diagnose(spec(40.0, 0.7), 88.0);
    EXPECT_TRUE(ok.adiabatic_window);
    EXPECT_TRUE(ok.verdicts.adiabatic());

    const auto short_delay = diagnose(spec(40.0, 0.2), 0.0);
    EXPECT_FALSE(short_delay.verdicts.tau_above_lower);
    EXPECT_FALSE(short_delay.verdicts.adiabatic());

    const auto detuned = diagnose(spec(40.0, 0.7), 500.0);
    EXPECT_FALSE(detuned.verdicts.delta_within_bound);

    const auto closed = diagnose(spec(1.0, 0.7), 0.0);
    EXPECT_FALSE(closed.adiabatic_window);

    PulseSpec t = spec(40.0, 0.7);
    t.shape = PulseShape::Truncated;
    EXPECT_THROW(diagnose(t, 0.0), UnsupportedShape);
}
