#pragma once

// File formats: trajectory CSV, sweep CSV + JSON sidecar, diagnostics and
// dark-state JSON documents. Numbers in CSV use "%.17g" so identical runs give
// byte-identical files.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "fstirap/diagnostics.hpp"
#include "fstirap/propagator.hpp"
#include "fstirap/sweeps.hpp"
#include "fstirap/system.hpp"

namespace fstirap::io {

using nlohmann::json;

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

inline json optional_number(const std::optional<double>& v)
{
    return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const PulseSpec& p)
{
    return {{"shape", to_string(p.shape)}, {"omega0", p.omega0},   {"width_T", p.width_T},
            {"tau", p.delay_tau},          {"alpha", p.mix_alpha}, {"phase_p", p.phase_p},
            {"phase_s", p.phase_s},        {"trunc_a", p.trunc_a}};
}

inline json to_json(const SystemSpec& s)
{
    json j = {{"kind", to_string(s.kind)}, {"delta", s.detuning_delta}};
    if (s.kind == SystemKind::Chain) {
        j["J"] = s.j_lower;
        j["Jp"] = s.j_upper;
        j["initial_m"] = s.initial_m;
    }
    return j;
}

inline json to_json(const IntegratorControl& c)
{
    return {{"method", "runge_kutta_fehlberg78"}, {"tolerance", c.tolerance}, {"abs_tolerance", c.abs_tolerance()},
            {"max_steps", c.max_steps},          {"output_points", c.output_points}};
}

// ---- trajectory ----------------------------------------------------------

/// Header `t,P1..Pn,ReC1,ImC1,...,ReCn,ImCn`; one row per stored state.
inline void write_trajectory_csv(std::ostream& os, const PropagationResult& result)
{
    if (result.trajectory.empty())
        return;
    const auto n = result.trajectory.front().amplitudes.size();
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i)
        os << ",P" << i;
    for (Eigen::Index i = 1; i <= n; ++i)
        os << ",ReC" << i << ",ImC" << i;
    os << '\n';
    for (const auto& s : result.trajectory) {
        os << num(s.t);
        for (Eigen::Index i = 0; i < n; ++i)
            os << ',' << num(std::norm(s.amplitudes(i)));
        for (Eigen::Index i = 0; i < n; ++i)
            os << ',' << num(s.amplitudes(i).real()) << ',' << num(s.amplitudes(i).imag());
        os << '\n';
    }
}

inline json summary_json(const PropagationResult& result, const FinalSuperposition& sup)
{
    json j;
    j["final_populations"] = result.final_populations;
    j["alpha_measured"] = sup.alpha_measured;
    j["beta_measured"] = optional_number(sup.beta_measured);
    j["final_phase_31"] = optional_number(result.final_phase_31);
    j["max_p2"] = result.max_p2;
    j["norm_drift"] = result.norm_drift;
    j["dark_overlap_min"] = result.dark_overlap_min;
    j["accepted_steps"] = result.accepted_steps;
    j["rejected_steps"] = result.rejected_steps;
    j["t_final"] = result.final_state.t;
    return j;
}

// ---- diagnostics ---------------------------------------------------------

inline json to_json(const DiagnosticsReport& r)
{
    return {{"t_max", r.t_max},
            {"theta_dot_max", r.theta_dot_max},
            {"omega_at_tmax", r.omega_at_tmax},
            {"width_theta", finite_or_null(r.width_theta)},
            {"width_omega", r.width_omega},
            {"tau_min", r.tau_min},
            {"tau_max", optional_number(r.tau_max)},
            {"tau_max_unbounded", !r.tau_max.has_value()},
            {"adiabatic_window", r.adiabatic_window},
            {"delta_max", finite_or_null(r.delta_max)},
            {"delta_max_unbounded", !std::isfinite(r.delta_max)},
            {"n_adiabatic", r.n_adiabatic},
            {"verdicts",
             {{"tau_above_lower", r.verdicts.tau_above_lower},
              {"tau_below_upper", r.verdicts.tau_below_upper},
              {"delta_within_bound", r.verdicts.delta_within_bound},
              {"no_risk_at_tmax", r.verdicts.no_risk_at_tmax},
              {"adiabatic", r.verdicts.adiabatic()}}}};
}

// ---- dark state ----------------------------------------------------------

inline std::string rational_string(const boost::multiprecision::cpp_rational& q)
{
    const auto num_part = boost::multiprecision::numerator(q);
    const auto den_part = boost::multiprecision::denominator(q);
    if (den_part == 1)
        return num_part.str();
    return num_part.str() + "/" + den_part.str();
}

inline json to_json(const DarkState& d, const SystemSpec& spec,
                    const std::optional<std::vector<ExactCG>>& exact = std::nullopt)
{
    json amps = json::array();
    int lower_index = 0;
    for (int i = 0; i < d.dim; ++i) {
        const Complex c = d.amplitudes(i);
        json a = {{"level", level_label(spec, i)}, {"upper", Linkage::is_upper(i)},
                  {"re", c.real()},               {"im", c.imag()},
                  {"abs", std::abs(c)}};
        if (exact && !Linkage::is_upper(i)) {
            const auto& e = (*exact)[static_cast<std::size_t>(lower_index)];
            a["exact"] = e.sign == 0 ? std::string("0")
                                     : (e.sign < 0 ? "-" : "+") + std::string("sqrt(") + rational_string(e.square) + ")";
            a["exact_square"] = rational_string(e.square);
        }
        if (!Linkage::is_upper(i))
            ++lower_index;
        amps.push_back(std::move(a));
    }
    return {{"dim", d.dim}, {"mix_alpha", d.mix_alpha}, {"phase_beta", d.phase_beta}, {"amplitudes", amps}};
}

// ---- sweeps --------------------------------------------------------------

inline std::string x_column(SweepAxisX x) { return x == SweepAxisX::DelayTau ? "tau" : "delta"; }
inline std::string y_column(SweepAxisY y) { return y == SweepAxisY::Omega0 ? "omega0" : "omega0_squared"; }

inline int sweep_dim(const SweepPlan& plan) { return plan.base_system.dim(); }

/// One row per cell in cell-index order. Stops at the first cancelled cell and
/// appends a `# truncated` marker line.
inline void write_sweep_csv(std::ostream& os, const SweepResult& result)
{
    const SweepPlan& plan = result.plan;
    const int n = sweep_dim(plan);
    os << x_column(plan.axis_x) << ',' << y_column(plan.axis_y);
    for (const auto o : plan.observables) {
        if (o == Observable::Populations)
            for (int i = 1; i <= n; ++i)
                os << ",P" << i;
        else
            os << ',' << to_string(o);
    }
    os << ",status,message\n";

    for (const auto& c : result.cells) {
        if (c.status == CellStatus::Cancelled) {
            os << "# truncated\n";
            return;
        }
        os << num(c.x) << ',' << num(c.y);
        const bool ok = c.status == CellStatus::Ok;
        for (const auto o : plan.observables) {
            switch (o) {
            case Observable::Populations:
                for (int i = 0; i < n; ++i)
                    os << ',' << (ok ? num(c.populations[static_cast<std::size_t>(i)]) : "");
                break;
            case Observable::AlphaMeasured: os << ',' << (ok ? num(c.alpha_measured) : ""); break;
            case Observable::BetaMeasured: os << ',' << (ok && c.beta_measured ? num(*c.beta_measured) : ""); break;
            case Observable::MaxP2: os << ',' << (ok ? num(c.max_p2) : ""); break;
            case Observable::DarkOverlapMin: os << ',' << (ok ? num(c.dark_overlap_min) : ""); break;
            }
        }
        std::string msg = c.message;
        for (auto& ch : msg)
            if (ch == '"' || ch == '\n' || ch == ',')
                ch = ' ';
        os << ',' << to_string(c.status) << ',' << msg << '\n';
    }
}

inline json to_json(const SweepPlan& plan)
{
    json obs = json::array();
    for (const auto o : plan.observables)
        obs.push_back(to_string(o));
    return {{"x_axis", to_string(plan.axis_x)},
            {"y_axis", to_string(plan.axis_y)},
            {"x_range", {{"lo", plan.x_range.lo}, {"hi", plan.x_range.hi}, {"count", plan.x_range.count}}},
            {"y_range", {{"lo", plan.y_range.lo}, {"hi", plan.y_range.hi}, {"count", plan.y_range.count}}},
            {"base_pulses", to_json(plan.base_pulses)},
            {"base_system", to_json(plan.base_system)},
            {"observables", obs},
            {"n_adiabatic", plan.n_adiabatic}};
}

inline json boundary_curves_json(const std::vector<BoundaryCurve>& curves)
{
    json out = json::object();
    for (const auto& c : curves) {
        json pts = json::array();
        for (const auto& [x, y] : c.points)
            pts.push_back({x, y});
        out[c.name] = pts;
    }
    return out;
}

inline json sweep_sidecar_json(const SweepResult& result)
{
    json j;
    j["plan"] = to_json(result.plan);
    j["boundary_curves"] = boundary_curves_json(result.boundary_curves);
    j["metadata"] = {{"integrator", to_json(result.metadata.control)},
                     {"wall_seconds", result.metadata.wall_seconds},
                     {"version", result.metadata.version},
                     {"workers", result.metadata.workers},
                     {"cancelled", result.metadata.cancelled},
                     {"cells", result.cells.size()},
                     {"failed_cells", result.failed_cells()}};
    if (result.oscillation) {
        const auto& o = *result.oscillation;
        j["oscillation"] = {{"detected", o.detected},
                            {"insufficient_resolution", o.insufficient_resolution},
                            {"incomplete", o.incomplete},
                            {"extrema", o.extrema},
                            {"max_peak_to_trough", o.max_peak_to_trough}};
    }
    return j;
}

} // namespace fstirap::io
