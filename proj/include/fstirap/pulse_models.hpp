#pragma once

// Pump and Stokes envelopes for fractional STIRAP.
//
// Two families are provided:
//   Smooth     OmegaP = W0 sin(a) g(t - tau)
//              OmegaS = W0 g(t + tau) + W0 cos(a) g(t - tau),   g(x) = exp(-x^2/T^2)
//   Truncated  OmegaP = W0 sin(a) exp(-t^2/T^2),  OmegaS = W0 cos(a) exp(-(a' t/T)^2)
//              for t <= 0, both zero afterwards (a' = trunc_a < 1).
//
// For the smooth family the ratio OmegaP/OmegaS = sin(a) / (zeta + cos(a)) with
// zeta = exp(-4 tau t / T^2), which is how theta and its derivative are evaluated
// without ever forming 0/0 in the far wings.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "fstirap/errors.hpp"

namespace fstirap {

enum class PulseShape { Smooth, Truncated };

inline std::string to_string(PulseShape shape)
{
    return shape == PulseShape::Smooth ? "smooth" : "truncated";
}

struct PulseSpec {
    PulseShape shape = PulseShape::Smooth;
    double omega0 = 20.0;                       // peak Rabi frequency
    double width_T = 1.0;                       // Gaussian width T
    double delay_tau = 0.7;                     // tau >= 0
    double mix_alpha = std::numbers::pi / 4.0;  // target mixing angle in [0, pi/2]
    double phase_p = 0.0;
    double phase_s = 0.0;
    double trunc_a = 0.5;                       // Truncated only, in (0, 1)

    /// Relative phase of the final superposition, phiP + phiS.
    double beta() const noexcept { return phase_p + phase_s; }

    void validate() const
    {
        if (!(omega0 >= 0.0) || !std::isfinite(omega0))
            throw ConfigError("pulse omega0 must be finite and >= 0");
        if (!(width_T > 0.0) || !std::isfinite(width_T))
            throw ConfigError("pulse width T must be finite and > 0");
        if (!(delay_tau >= 0.0) || !std::isfinite(delay_tau))
            throw ConfigError("pulse delay tau must be finite and >= 0");
        if (!(mix_alpha >= 0.0 && mix_alpha <= std::numbers::pi / 2.0 + 1e-15))
            throw ConfigError("mixing angle alpha must lie in [0, pi/2]");
        if (!std::isfinite(phase_p) || !std::isfinite(phase_s))
            throw ConfigError("pulse phases must be finite");
        if (shape == PulseShape::Truncated && !(trunc_a > 0.0 && trunc_a < 1.0))
            throw ConfigError("truncation ratio a must lie in (0, 1)");
    }
};

/// Field magnitudes and derived mixing-angle quantities at one instant.
struct PulseSample {
    double t = 0.0;
    double omega_p = 0.0;
    double omega_s = 0.0;
    double omega_rms = 0.0;
    double theta = 0.0;
    /// Empty where the derivative is undefined (Truncated cutoff at t = 0).
    std::optional<double> theta_dot;
};

/// Pump and Stokes magnitudes only, for hot loops.
struct FieldAmplitudes {
    double omega_p = 0.0;
    double omega_s = 0.0;
};

namespace detail {

// exp() argument limit; beyond it zeta is treated as saturated.
inline constexpr double kMaxExponent = 700.0;

inline double log_zeta(const PulseSpec& spec, double t) noexcept
{
    const double T = spec.width_T;
    return std::clamp(-4.0 * spec.delay_tau * t / (T * T), -kMaxExponent, kMaxExponent);
}

inline double theta_smooth(const PulseSpec& spec, double t) noexcept
{
    const double zeta = std::exp(log_zeta(spec, t));
    return std::atan2(std::sin(spec.mix_alpha), zeta + std::cos(spec.mix_alpha));
}

inline double theta_truncated(const PulseSpec& spec, double t) noexcept
{
    if (t > 0.0)
        return spec.mix_alpha;
    const double T = spec.width_T;
    const double a = spec.trunc_a;
    const double damp = std::exp(-(1.0 - a * a) * t * t / (T * T));
    return std::atan2(std::sin(spec.mix_alpha) * damp, std::cos(spec.mix_alpha));
}

} // namespace detail

inline FieldAmplitudes field_amplitudes(const PulseSpec& spec, double t) noexcept
{
    const double T = spec.width_T;
    const double sa = std::sin(spec.mix_alpha);
    const double ca = std::cos(spec.mix_alpha);
    if (spec.shape == PulseShape::Smooth) {
        const double late = std::exp(-(t - spec.delay_tau) * (t - spec.delay_tau) / (T * T));
        const double early = std::exp(-(t + spec.delay_tau) * (t + spec.delay_tau) / (T * T));
        return {spec.omega0 * sa * late, spec.omega0 * (early + ca * late)};
    }
    if (t > 0.0)
        return {0.0, 0.0};
    const double x = t / T;
    const double a = spec.trunc_a;
    return {spec.omega0 * sa * std::exp(-x * x), spec.omega0 * ca * std::exp(-a * a * x * x)};
}

/// theta(t) = arctan(OmegaP/OmegaS), evaluated from the pulse-shape ratio so it
/// stays defined where both envelopes underflow.
inline double mixing_angle(const PulseSpec& spec, double t) noexcept
{
    return spec.shape == PulseShape::Smooth ? detail::theta_smooth(spec, t)
                                            : detail::theta_truncated(spec, t);
}

/// Closed-form nonadiabatic coupling for the smooth family (phase-independent).
inline double theta_dot_analytic(const PulseSpec& spec, double t)
{
    if (spec.shape != PulseShape::Smooth)
        throw UnsupportedShape("theta_dot_analytic requires the smooth pulse shape");
    const double T = spec.width_T;
    const double zeta = std::exp(detail::log_zeta(spec, t));
    // zeta sin / (sin^2 + (cos + zeta)^2), divided through by zeta.
    const double denom = 1.0 / zeta + 2.0 * std::cos(spec.mix_alpha) + zeta;
    return 4.0 * spec.delay_tau / (T * T) * std::sin(spec.mix_alpha) / denom;
}

/// Closed-form rms Rabi frequency for the smooth family.
inline double omega_rms_analytic(const PulseSpec& spec, double t)
{
    if (spec.shape != PulseShape::Smooth)
        throw UnsupportedShape("omega_rms_analytic requires the smooth pulse shape");
    const double T = spec.width_T;
    const double sa = std::sin(spec.mix_alpha);
    const double ca = std::cos(spec.mix_alpha);
    const double log_late = -(t - spec.delay_tau) * (t - spec.delay_tau) / (T * T);
    const double late = std::exp(log_late);
    // late * zeta, combined in the exponent so neither factor over/underflows alone.
    const double late_zeta = std::exp(log_late - 4.0 * spec.delay_tau * t / (T * T));
    const double a = sa * late;
    const double b = ca * late + late_zeta;
    return spec.omega0 * std::sqrt(a * a + b * b);
}

inline PulseSample eval_pulses(const PulseSpec& spec, double t)
{
    PulseSample s;
    s.t = t;
    const auto f = field_amplitudes(spec, t);
    s.omega_p = f.omega_p;
    s.omega_s = f.omega_s;
    s.omega_rms = std::hypot(f.omega_p, f.omega_s);
    s.theta = mixing_angle(spec, t);

    if (spec.shape == PulseShape::Smooth) {
        s.theta_dot = theta_dot_analytic(spec, t);
        return s;
    }
    if (t == 0.0)
        return s; // derivative jumps at the cutoff
    const double h = 1e-6 * spec.width_T;
    if (t < 0.0 && t + h >= 0.0)
        s.theta_dot = (mixing_angle(spec, t) - mixing_angle(spec, t - h)) / h;
    else if (t > 0.0 && t - h <= 0.0)
        s.theta_dot = (mixing_angle(spec, t + h) - mixing_angle(spec, t)) / h;
    else
        s.theta_dot = (mixing_angle(spec, t + h) - mixing_angle(spec, t - h)) / (2.0 * h);
    return s;
}

} // namespace fstirap
