#pragma once

// Time-dependent Schroedinger propagation  i dc/dt = H(t) c  (hbar = 1) with an
// adaptive Dormand-Prince 5(4) pair.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "fstirap/pulse_models.hpp"
#include "fstirap/system.hpp"

namespace fstirap {

struct IntegratorControl {
    double tolerance = 1e-10;        // local relative error target
    std::size_t max_steps = 5'000'000;
    std::size_t output_points = 400; // 0 keeps only the two endpoints

    /// Absolute error target, two decades below the relative one; keeps the
    /// accumulated norm drift of long runs well under 1e-9.
    double abs_tolerance() const noexcept { return 1e-2 * tolerance; }

    void validate() const
    {
        if (!(tolerance > 0.0 && tolerance < 1.0))
            throw ConfigError("integrator tolerance must lie in (0, 1)");
        if (max_steps == 0)
            throw ConfigError("integrator max_steps must be positive");
    }
};

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// +-(tau + 6T) for the smooth family; the truncated family stretches the
/// early side by the Stokes width T/a.
inline TimeWindow default_window(const PulseSpec& spec)
{
    const double T = spec.width_T;
    const double tail = spec.delay_tau + 6.0 * T;
    if (spec.shape == PulseShape::Truncated)
        return {-(spec.delay_tau + 6.0 * T / spec.trunc_a), tail};
    return {-tail, tail};
}

struct StateVector {
    double t = 0.0;
    Eigen::VectorXcd amplitudes;
};

struct PropagationResult {
    std::vector<StateVector> trajectory; // thinned, always includes both endpoints
    StateVector final_state;
    std::vector<double> final_populations;
    std::optional<double> final_phase_31; // arg c_last - arg c_first
    double max_p2 = 0.0;                  // peak total upper-level population
    double norm_drift = 0.0;              // max | |c|^2 - 1 | over accepted steps
    double dark_overlap_min = 1.0;        // min |<Phi(t)|c(t)>|^2 over accepted steps
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::vector<double> grid() const
    {
        std::vector<double> g;
        g.reserve(trajectory.size());
        for (const auto& s : trajectory)
            g.push_back(s.t);
        return g;
    }
};

class IntegrationFailure : public std::runtime_error {
public:
    IntegrationFailure(const std::string& what, PropagationResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}

    const PropagationResult& partial() const noexcept { return partial_; }

private:
    PropagationResult partial_;
};

namespace detail {

using OdeState = std::vector<Complex>;

struct SchroedingerRhs {
    const Linkage* link;
    const PulseSpec* pulses;
    FieldPhases phases;

    void operator()(const OdeState& c, OdeState& dcdt, double t) const
    {
        const auto f = field_amplitudes(*pulses, t);
        const int n = link->dim();
        for (int i = 0; i < n; ++i)
            dcdt[static_cast<std::size_t>(i)] = Linkage::is_upper(i) ? link->delta * c[static_cast<std::size_t>(i)] : Complex{};
        for (int k = 0; k + 1 < n; ++k) {
            const Complex e = link_element(*link, k, f, phases);
            const auto ku = static_cast<std::size_t>(k);
            dcdt[ku] += e * c[ku + 1];
            dcdt[ku + 1] += std::conj(e) * c[ku];
        }
        constexpr Complex minus_i{0.0, -1.0};
        for (auto& v : dcdt)
            v *= minus_i;
    }
};

inline Eigen::VectorXcd to_eigen(const OdeState& c)
{
    Eigen::VectorXcd v(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = c[i];
    return v;
}

} // namespace detail

inline PropagationResult propagate(const SystemSpec& system, const PulseSpec& pulses,
                                   std::optional<TimeWindow> window_opt = std::nullopt,
                                   const IntegratorControl& control = {})
{
    namespace odeint = boost::numeric::odeint;
    using detail::OdeState;

    pulses.validate();
    control.validate();
    const Linkage link = make_linkage(system);
    const TimeWindow window = window_opt.value_or(default_window(pulses));
    if (!(window.t0 < window.t1))
        throw ConfigError("propagation window requires t0 < t1");

    const FieldPhases phases{pulses.phase_p, pulses.phase_s};
    const detail::SchroedingerRhs rhs{&link, &pulses, phases};
    const int n = link.dim();

    OdeState c(static_cast<std::size_t>(n), Complex{});
    c[0] = 1.0;

    PropagationResult result;
    std::vector<StateVector> accepted;
    accepted.push_back({window.t0, detail::to_eigen(c)});

    auto observe = [&](double t) {
        double norm2 = 0.0;
        double upper = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p = std::norm(c[static_cast<std::size_t>(i)]);
            norm2 += p;
            if (Linkage::is_upper(i))
                upper += p;
        }
        result.norm_drift = std::max(result.norm_drift, std::abs(norm2 - 1.0));
        result.max_p2 = std::max(result.max_p2, upper);
        const Eigen::VectorXcd dark = dark_vector(link, mixing_angle(pulses, t), pulses.beta());
        const double dn = dark.squaredNorm();
        if (dn > 0.0) {
            const Eigen::VectorXcd state = detail::to_eigen(c);
            result.dark_overlap_min = std::min(result.dark_overlap_min, std::norm(dark.dot(state)) / dn);
        }
    };
    observe(window.t0);

    auto finish = [&](double t_end) {
        result.final_state = {t_end, detail::to_eigen(c)};
        result.final_populations.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            result.final_populations[static_cast<std::size_t>(i)] = std::norm(c[static_cast<std::size_t>(i)]);
        const Complex first = c.front();
        const Complex last = c.back();
        if (std::abs(first) > 0.0 && std::abs(last) > 0.0)
            result.final_phase_31 = std::arg(last) - std::arg(first);

        const std::size_t total = accepted.size();
        const std::size_t points = control.output_points;
        if (points == 0 || total <= points) {
            result.trajectory = points == 0 ? std::vector<StateVector>{accepted.front(), accepted.back()} : accepted;
        } else {
            const std::size_t stride = (total + points - 1) / points;
            for (std::size_t i = 0; i < total; i += stride)
                result.trajectory.push_back(accepted[i]);
            if (result.trajectory.back().t != accepted.back().t)
                result.trajectory.push_back(accepted.back());
        }
        if (result.trajectory.size() == 1)
            result.trajectory.push_back(accepted.back());
    };

    // Segment boundaries: the truncated family switches off at t = 0.
    std::vector<double> cuts{window.t0};
    if (pulses.shape == PulseShape::Truncated && window.t0 < 0.0 && window.t1 > 0.0)
        cuts.push_back(0.0);
    cuts.push_back(window.t1);

    const double span = window.t1 - window.t0;
    double t = window.t0;
    double dt = std::min(1e-2 * pulses.width_T, span / 16.0);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double t_end = cuts[seg + 1];
        auto stepper = odeint::make_controlled(control.abs_tolerance(), control.tolerance,
                                               odeint::runge_kutta_fehlberg78<OdeState>());
        while (t < t_end) {
            if (result.accepted_steps + result.rejected_steps >= control.max_steps) {
                finish(t);
                throw IntegrationFailure("step budget of " + std::to_string(control.max_steps)
                                             + " exhausted at t=" + std::to_string(t),
                                         std::move(result));
            }
            const bool last_step = dt >= t_end - t;
            double step = last_step ? t_end - t : dt;
            const double t_before = t;
            if (stepper.try_step(rhs, c, t, step) == odeint::success) {
                if (last_step)
                    t = t_end; // land exactly on the boundary
                else
                    dt = step;
                ++result.accepted_steps;
                accepted.push_back({t, detail::to_eigen(c)});
                observe(t);
            } else {
                ++result.rejected_steps;
                dt = step;
                if (dt < 1e-14 * span) {
                    finish(t_before);
                    throw IntegrationFailure("step size underflow at t=" + std::to_string(t_before),
                                             std::move(result));
                }
            }
        }
    }
    finish(window.t1);
    return result;
}

struct FinalSuperposition {
    double alpha_measured = 0.0;
    std::optional<double> beta_measured; // in [0, 2 pi)
    double upper_population = 0.0;       // total population left in upper levels
};

/// Reads the mixing angle and relative phase off the first and last levels.
inline FinalSuperposition final_superposition(const PropagationResult& result)
{
    const Eigen::VectorXcd& c = result.final_state.amplitudes;
    if (c.size() < 3)
        throw ConfigError("final_superposition needs at least three levels");
    const Complex c1 = c(0);
    const Complex c3 = c(c.size() - 1);
    const double p1 = std::norm(c1);
    const double p3 = std::norm(c3);

    FinalSuperposition out;
    for (Eigen::Index i = 1; i < c.size(); i += 2)
        out.upper_population += std::norm(c(i));
    constexpr double kTiny = 1e-12;
    if (p1 < kTiny) {
        out.alpha_measured = std::numbers::pi / 2.0;
        return out;
    }
    out.alpha_measured = std::atan(std::sqrt(p3 / p1));
    if (p3 >= kTiny) {
        double beta = std::arg(-c3 / c1);
        if (beta < 0.0)
            beta += 2.0 * std::numbers::pi;
        if (beta >= 2.0 * std::numbers::pi)
            beta = 0.0;
        out.beta_measured = beta + 0.0; // no -0
    }
    return out;
}

} // namespace fstirap
