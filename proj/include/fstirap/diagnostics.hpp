#pragma once

// Closed-form adiabaticity analysis for the smooth pulse family: location and
// size of the nonadiabatic coupling peak, FWHM estimates, bounds on the pulse
// delay and on the intermediate-state detuning.
//
// The "much larger / much smaller" statements of the analysis are used as
// equalities that define boundary curves; the adiabatic regime is the open
// region between them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "fstirap/errors.hpp"
#include "fstirap/pulse_models.hpp"

namespace fstirap {

inline constexpr double kDefaultAdiabaticity = 5.0;

namespace detail {

inline void require_smooth(const PulseSpec& spec, const char* op)
{
    if (spec.shape != PulseShape::Smooth)
        throw UnsupportedShape(std::string(op) + " requires the smooth pulse shape");
}

inline void require_n(double n)
{
    if (!(n >= 1.0) || !std::isfinite(n))
        throw ConfigError("adiabaticity factor n must be finite and >= 1");
}

// ln(sqrt(1 + c^2) + c), c = cos(alpha/2)
inline double width_log_factor(double alpha)
{
    const double c = std::cos(0.5 * alpha);
    return std::log(std::sqrt(1.0 + c * c) + c);
}

} // namespace detail

struct CouplingExtrema {
    double t_max = 0.0;
    double theta_dot_max = 0.0;
    double omega_at_tmax = 0.0;
};

inline CouplingExtrema coupling_extrema(const PulseSpec& spec)
{
    detail::require_smooth(spec, "coupling_extrema");
    const double T = spec.width_T;
    const double tau = spec.delay_tau;
    const double half = 0.5 * spec.mix_alpha;
    return {0.0, 2.0 * tau / (T * T) * std::tan(half),
            2.0 * spec.omega0 * std::exp(-tau * tau / (T * T)) * std::cos(half)};
}

struct CouplingWidths {
    double width_theta = std::numeric_limits<double>::infinity(); // infinite at tau = 0
    double width_omega = 0.0;
};

inline CouplingWidths coupling_widths(const PulseSpec& spec)
{
    detail::require_smooth(spec, "coupling_widths");
    const double T = spec.width_T;
    CouplingWidths w;
    if (spec.delay_tau > 0.0)
        w.width_theta = T * T / spec.delay_tau * detail::width_log_factor(spec.mix_alpha);
    w.width_omega = 2.0 * spec.delay_tau + 2.0 * T * std::sqrt(std::numbers::ln2);
    return w;
}

/// Delay at which the theta_dot width equals the Omega width; smaller delays let
/// the coupling outlive the pulses.
inline double tau_lower_bound(const PulseSpec& spec)
{
    detail::require_smooth(spec, "tau_lower_bound");
    // T^2 L / tau = 2 tau + 2 T sqrt(ln 2)  <=>  2 tau^2 + 2 sqrt(ln 2) T tau - T^2 L = 0
    const double T = spec.width_T;
    const double L = detail::width_log_factor(spec.mix_alpha);
    const double b = 2.0 * std::sqrt(std::numbers::ln2);
    return T * (-b + std::sqrt(b * b + 8.0 * L)) / 4.0;
}

/// Largest tau with  Omega0 T = [2n sin(a/2)/cos^2(a/2)] (tau/T) exp(tau^2/T^2).
/// Empty when the prefactor vanishes (alpha = 0): no upper bound.
inline std::optional<double> tau_upper_root(const PulseSpec& spec, double n = kDefaultAdiabaticity)
{
    detail::require_smooth(spec, "tau_upper_bound");
    detail::require_n(n);
    const double T = spec.width_T;
    const double half = 0.5 * spec.mix_alpha;
    const double prefactor = 2.0 * n * std::sin(half) / (std::cos(half) * std::cos(half));
    const double target = spec.omega0 * T;
    if (!(prefactor > 0.0))
        return std::nullopt;
    if (!(target > 0.0))
        return 0.0;

    const auto excess = [&](double x) { return prefactor * x * std::exp(x * x) - target; };
    double hi = std::sqrt(std::max(std::log(target) + 2.0, 1.0));
    while (excess(hi) < 0.0)
        hi *= 2.0;
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iterations = 200;
    const auto [lo_x, hi_x] = boost::math::tools::toms748_solve(excess, 0.0, hi, -target, excess(hi), tol, iterations);
    return T * 0.5 * (lo_x + hi_x);
}

/// Like tau_upper_root, but throws NoAdiabaticWindow when the root does not
/// exceed tau_lower_bound. Infinity means unbounded.
inline double tau_upper_bound(const PulseSpec& spec, double n = kDefaultAdiabaticity)
{
    const auto root = tau_upper_root(spec, n);
    if (!root)
        return std::numeric_limits<double>::infinity();
    const double lower = tau_lower_bound(spec);
    if (*root <= lower)
        throw NoAdiabaticWindow("no adiabatic window: tau upper bound " + std::to_string(*root)
                                + " does not exceed lower bound " + std::to_string(lower));
    return *root;
}

/// Detuning bound  Delta <= [cos^3(a/2) / (2n sin(a/2))] (T^2/tau) exp(-2 tau^2/T^2) Omega0^2.
/// Infinity for tau = 0 or alpha = 0.
inline double delta_bound(const PulseSpec& spec, double n = kDefaultAdiabaticity)
{
    detail::require_smooth(spec, "delta_bound");
    detail::require_n(n);
    const double T = spec.width_T;
    const double tau = spec.delay_tau;
    const double half = 0.5 * spec.mix_alpha;
    const double s = std::sin(half);
    if (!(tau > 0.0) || !(s > 0.0))
        return std::numeric_limits<double>::infinity();
    const double c = std::cos(half);
    return c * c * c / (2.0 * n * s) * (T * T / tau) * std::exp(-2.0 * tau * tau / (T * T)) * spec.omega0
           * spec.omega0;
}

/// Detuning angle from tan(2 phi) = Omega / Delta; phi = pi/4 on resonance.
inline double detuning_angle(double omega_rms, double delta)
{
    return 0.5 * std::atan2(omega_rms, delta);
}

/// Small-angle form phi ~ Omega / (2 Delta) used to derive the detuning bound.
inline double detuning_angle_approx(double omega_rms, double delta)
{
    return omega_rms / (2.0 * delta);
}

struct RiskVerdict {
    bool adiabaticity_violated = false; // |theta_dot| >= Omega/2
    bool coupling_appreciable = false;  // |theta_dot| >= 1/T
    bool at_risk() const noexcept { return adiabaticity_violated && coupling_appreciable; }
};

inline RiskVerdict nonadiabatic_risk(const PulseSpec& spec, double t)
{
    detail::require_smooth(spec, "nonadiabatic_risk");
    const double td = std::abs(theta_dot_analytic(spec, t));
    const double omega = omega_rms_analytic(spec, t);
    return {td >= 0.5 * omega, td >= 1.0 / spec.width_T};
}

/// Detuned form: violated when n |theta_dot| exceeds (Omega/2) sin(phi)/cos^2(phi)
/// with the exact detuning angle.
inline RiskVerdict nonadiabatic_risk_detuned(const PulseSpec& spec, double delta, double t,
                                             double n = kDefaultAdiabaticity)
{
    detail::require_smooth(spec, "nonadiabatic_risk_detuned");
    detail::require_n(n);
    const double td = std::abs(theta_dot_analytic(spec, t));
    const double omega = omega_rms_analytic(spec, t);
    const double phi = detuning_angle(omega, std::abs(delta));
    const double cphi = std::cos(phi);
    const double rhs = 0.5 * omega * std::sin(phi) / (cphi * cphi);
    return {n * td >= rhs, td >= 1.0 / spec.width_T};
}

struct DiagnosticsVerdicts {
    bool tau_above_lower = false;
    bool tau_below_upper = false;
    bool delta_within_bound = false;
    bool no_risk_at_tmax = false;
    bool adiabatic() const noexcept
    {
        return tau_above_lower && tau_below_upper && delta_within_bound && no_risk_at_tmax;
    }
};

struct DiagnosticsReport {
    double t_max = 0.0;
    double theta_dot_max = 0.0;
    double omega_at_tmax = 0.0;
    double width_theta = 0.0;
    double width_omega = 0.0;
    double tau_min = 0.0;
    std::optional<double> tau_max;  // empty when unbounded
    bool adiabatic_window = true;   // tau_max > tau_min
    double delta_max = 0.0;
    double n_adiabatic = kDefaultAdiabaticity;
    DiagnosticsVerdicts verdicts;
};

/// Full report for a smooth pulse pair at detuning delta. Never throws
/// NoAdiabaticWindow; the flag is recorded instead.
inline DiagnosticsReport diagnose(const PulseSpec& spec, double delta, double n = kDefaultAdiabaticity)
{
    spec.validate();
    detail::require_smooth(spec, "diagnose");
    detail::require_n(n);
    DiagnosticsReport r;
    const auto ext = coupling_extrema(spec);
    r.t_max = ext.t_max;
    r.theta_dot_max = ext.theta_dot_max;
    r.omega_at_tmax = ext.omega_at_tmax;
    const auto w = coupling_widths(spec);
    r.width_theta = w.width_theta;
    r.width_omega = w.width_omega;
    r.tau_min = tau_lower_bound(spec);
    r.tau_max = tau_upper_root(spec, n);
    r.adiabatic_window = !r.tau_max || *r.tau_max > r.tau_min;
    r.delta_max = delta_bound(spec, n);
    r.n_adiabatic = n;

    r.verdicts.tau_above_lower = spec.delay_tau >= r.tau_min;
    r.verdicts.tau_below_upper = !r.tau_max || spec.delay_tau <= *r.tau_max;
    r.verdicts.delta_within_bound = std::abs(delta) <= r.delta_max;
    r.verdicts.no_risk_at_tmax = !nonadiabatic_risk(spec, r.t_max).at_risk();
    return r;
}

} // namespace fstirap
