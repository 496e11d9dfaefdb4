#pragma once

// Two-dimensional parameter scans of the final state. Each grid cell is an
// independent propagation; cells are written into a preallocated slot, so the
// result does not depend on how many workers ran or in which order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fstirap/diagnostics.hpp"
#include "fstirap/propagator.hpp"

namespace fstirap {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class SweepAxisX { DelayTau, DetuningDelta };
enum class SweepAxisY { Omega0, Omega0Squared };
enum class Observable { Populations, AlphaMeasured, BetaMeasured, MaxP2, DarkOverlapMin };

inline std::string to_string(SweepAxisX x) { return x == SweepAxisX::DelayTau ? "delay_tau" : "detuning_delta"; }
inline std::string to_string(SweepAxisY y) { return y == SweepAxisY::Omega0 ? "omega0" : "omega0_squared"; }

inline std::string to_string(Observable o)
{
    switch (o) {
    case Observable::Populations: return "populations";
    case Observable::AlphaMeasured: return "alpha_measured";
    case Observable::BetaMeasured: return "beta_measured";
    case Observable::MaxP2: return "max_p2";
    case Observable::DarkOverlapMin: return "dark_overlap_min";
    }
    return "?";
}

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;

    double at(int i) const
    {
        if (count == 1)
            return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

struct SweepPlan {
    SweepAxisX axis_x = SweepAxisX::DelayTau;
    SweepAxisY axis_y = SweepAxisY::Omega0;
    AxisRange x_range{0.1, 1.6, 41};
    AxisRange y_range{2.0, 60.0, 41};
    PulseSpec base_pulses{};
    SystemSpec base_system{};
    std::vector<Observable> observables{Observable::Populations, Observable::AlphaMeasured,
                                        Observable::BetaMeasured, Observable::MaxP2,
                                        Observable::DarkOverlapMin};
    IntegratorControl control{1e-10, 5'000'000, 0};
    double n_adiabatic = kDefaultAdiabaticity;

    void validate() const
    {
        for (const auto* r : {&x_range, &y_range}) {
            if (r->count < 2)
                throw ConfigError("sweep axis needs at least 2 points");
            if (!std::isfinite(r->lo) || !std::isfinite(r->hi) || !(r->lo < r->hi))
                throw ConfigError("sweep axis range must be finite with lo < hi");
        }
        if (axis_x == SweepAxisX::DelayTau && x_range.lo < 0.0)
            throw ConfigError("delay axis must be nonnegative");
        if (y_range.lo < 0.0)
            throw ConfigError("Rabi-frequency axis must be nonnegative");
        if (observables.empty())
            throw ConfigError("sweep needs at least one observable");
        base_pulses.validate();
        base_system.validate();
        control.validate();
    }

    bool wants(Observable o) const
    {
        return std::find(observables.begin(), observables.end(), o) != observables.end();
    }

    /// Pulse/system pair of the cell at (x, y).
    std::pair<PulseSpec, SystemSpec> cell_specs(double x, double y) const
    {
        PulseSpec p = base_pulses;
        SystemSpec s = base_system;
        if (axis_x == SweepAxisX::DelayTau)
            p.delay_tau = x;
        else
            s.detuning_delta = x;
        p.omega0 = axis_y == SweepAxisY::Omega0 ? y : std::sqrt(y);
        return {p, s};
    }
};

enum class CellStatus { Ok, Failed, Cancelled };

inline std::string to_string(CellStatus s)
{
    switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::Failed: return "failed";
    case CellStatus::Cancelled: return "cancelled";
    }
    return "?";
}

struct CellRecord {
    int ix = 0;
    int iy = 0;
    double x = 0.0;
    double y = 0.0;
    CellStatus status = CellStatus::Cancelled;
    std::string message;
    std::vector<double> populations;
    double alpha_measured = 0.0;
    std::optional<double> beta_measured;
    double max_p2 = 0.0;
    double dark_overlap_min = 0.0;
    double norm_drift = 0.0;

    /// Final population of the last level (psi3, or psi_J for chains).
    double p_last() const { return populations.empty() ? 0.0 : populations.back(); }
};

struct BoundaryCurve {
    std::string name;
    std::vector<std::pair<double, double>> points; // (x, y) in plan axis units
};

struct OscillationReport {
    bool insufficient_resolution = false;
    bool incomplete = false;      // some cells failed; no verdict
    bool detected = false;
    std::vector<int> extrema;     // y-indices of confirmed turning points
    double max_peak_to_trough = 0.0;
};

struct SweepMetadata {
    IntegratorControl control;
    double wall_seconds = 0.0;
    std::string version = kToolkitVersion;
    unsigned workers = 1;
    bool cancelled = false;
};

struct SweepResult {
    SweepPlan plan;
    std::vector<CellRecord> cells; // index = ix * ny + iy
    std::vector<BoundaryCurve> boundary_curves;
    SweepMetadata metadata;
    std::optional<OscillationReport> oscillation;

    int nx() const { return plan.x_range.count; }
    int ny() const { return plan.y_range.count; }
    const CellRecord& cell(int ix, int iy) const { return cells[static_cast<std::size_t>(ix * ny() + iy)]; }

    std::size_t failed_cells() const
    {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellRecord& c) {
            return c.status == CellStatus::Failed;
        }));
    }
};

struct SweepOptions {
    unsigned workers = 1;
    const std::atomic<bool>* cancel = nullptr;
    /// Called with (completed, total) from worker threads; must be thread-safe.
    std::function<void(std::size_t, std::size_t)> progress;
};

inline CellRecord run_cell(const SweepPlan& plan, int ix, int iy, double x, double y)
{
    CellRecord rec;
    rec.ix = ix;
    rec.iy = iy;
    rec.x = x;
    rec.y = y;
    try {
        const auto [pulses, system] = plan.cell_specs(x, y);
        const auto result = propagate(system, pulses, default_window(pulses), plan.control);
        const auto sup = final_superposition(result);
        rec.status = CellStatus::Ok;
        rec.populations = result.final_populations;
        rec.alpha_measured = sup.alpha_measured;
        rec.beta_measured = sup.beta_measured;
        rec.max_p2 = result.max_p2;
        rec.dark_overlap_min = result.dark_overlap_min;
        rec.norm_drift = result.norm_drift;
    } catch (const std::exception& e) {
        rec.status = CellStatus::Failed;
        rec.message = e.what();
    }
    return rec;
}

inline std::vector<BoundaryCurve> boundary_curves(const SweepPlan& plan)
{
    std::vector<BoundaryCurve> curves;
    const PulseSpec& base = plan.base_pulses;
    if (base.shape != PulseShape::Smooth)
        return curves;
    const auto y_to_omega = [&](double y) { return plan.axis_y == SweepAxisY::Omega0 ? y : std::sqrt(y); };

    if (plan.axis_x == SweepAxisX::DelayTau) {
        BoundaryCurve lower{"tau_lower_bound", {}};
        BoundaryCurve upper{"tau_upper_bound", {}};
        const double tau_min = tau_lower_bound(base);
        for (int iy = 0; iy < plan.y_range.count; ++iy) {
            const double y = plan.y_range.at(iy);
            lower.points.emplace_back(tau_min, y);
            PulseSpec p = base;
            p.omega0 = y_to_omega(y);
            if (const auto root = tau_upper_root(p, plan.n_adiabatic))
                upper.points.emplace_back(*root, y);
        }
        curves.push_back(std::move(lower));
        curves.push_back(std::move(upper));
    } else {
        BoundaryCurve delta{"delta_bound", {}};
        for (int iy = 0; iy < plan.y_range.count; ++iy) {
            const double y = plan.y_range.at(iy);
            PulseSpec p = base;
            p.omega0 = y_to_omega(y);
            const double d = delta_bound(p, plan.n_adiabatic);
            if (std::isfinite(d))
                delta.points.emplace_back(d, y);
        }
        curves.push_back(std::move(delta));
    }
    return curves;
}

namespace detail {

inline void run_cells(std::vector<CellRecord>& cells, const SweepPlan& plan, const SweepOptions& options)
{
    const std::size_t total = cells.size();
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&] {
        for (;;) {
            if (options.cancel && options.cancel->load())
                return;
            const std::size_t i = next.fetch_add(1);
            if (i >= total)
                return;
            CellRecord& slot = cells[i];
            slot = run_cell(plan, slot.ix, slot.iy, slot.x, slot.y);
            const std::size_t finished = done.fetch_add(1) + 1;
            if (options.progress)
                options.progress(finished, total);
        }
    };
    const unsigned n = std::max(1u, options.workers);
    if (n == 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back(worker);
}

} // namespace detail

inline SweepResult run_sweep(const SweepPlan& plan, const SweepOptions& options = {})
{
    plan.validate();
    const auto start = std::chrono::steady_clock::now();
    SweepResult result;
    result.plan = plan;
    const int nx = plan.x_range.count;
    const int ny = plan.y_range.count;
    result.cells.resize(static_cast<std::size_t>(nx * ny));
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy) {
            auto& c = result.cells[static_cast<std::size_t>(ix * ny + iy)];
            c.ix = ix;
            c.iy = iy;
            c.x = plan.x_range.at(ix);
            c.y = plan.y_range.at(iy);
        }
    detail::run_cells(result.cells, plan, options);
    result.boundary_curves = boundary_curves(plan);
    result.metadata.control = plan.control;
    result.metadata.workers = std::max(1u, options.workers);
    result.metadata.cancelled = std::any_of(result.cells.begin(), result.cells.end(), [](const CellRecord& c) {
        return c.status == CellStatus::Cancelled;
    });
    result.metadata.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Turning points of a trace whose swing to the next turning point is at
/// least `threshold` (zigzag filter); endpoints are never counted.
inline OscillationReport detect_oscillations(const std::vector<double>& trace, double threshold = 0.05,
                                             std::size_t min_points = 5)
{
    OscillationReport rep;
    if (trace.size() < min_points) {
        rep.insufficient_resolution = true;
        return rep;
    }
    const int n = static_cast<int>(trace.size());
    int dir = 0;
    int i_hi = 0;
    int i_lo = 0;
    int i_ext = 0;
    for (int i = 1; i < n; ++i) {
        const double v = trace[static_cast<std::size_t>(i)];
        if (dir == 0) {
            if (v > trace[static_cast<std::size_t>(i_hi)])
                i_hi = i;
            if (v < trace[static_cast<std::size_t>(i_lo)])
                i_lo = i;
            if (trace[static_cast<std::size_t>(i_hi)] - trace[static_cast<std::size_t>(i_lo)] >= threshold) {
                if (i_hi < i_lo) { // went up, now down
                    if (i_hi > 0)
                        rep.extrema.push_back(i_hi);
                    dir = -1;
                    i_ext = i_lo;
                } else {
                    if (i_lo > 0)
                        rep.extrema.push_back(i_lo);
                    dir = +1;
                    i_ext = i_hi;
                }
            }
            continue;
        }
        const double ext = trace[static_cast<std::size_t>(i_ext)];
        if (dir > 0) {
            if (v > ext)
                i_ext = i;
            else if (ext - v >= threshold) {
                rep.extrema.push_back(i_ext);
                dir = -1;
                i_ext = i;
            }
        } else {
            if (v < ext)
                i_ext = i;
            else if (v - ext >= threshold) {
                rep.extrema.push_back(i_ext);
                dir = +1;
                i_ext = i;
            }
        }
    }
    for (std::size_t k = 0; k + 1 < rep.extrema.size(); ++k) {
        const double a = trace[static_cast<std::size_t>(rep.extrema[k])];
        const double b = trace[static_cast<std::size_t>(rep.extrema[k + 1])];
        rep.max_peak_to_trough = std::max(rep.max_peak_to_trough, std::abs(a - b));
    }
    if (rep.extrema.size() == 1) {
        // single turning point: measure against the larger endpoint swing
        const double e = trace[static_cast<std::size_t>(rep.extrema[0])];
        rep.max_peak_to_trough = std::max(std::abs(e - trace.front()), std::abs(e - trace.back()));
    }
    rep.detected = rep.extrema.size() >= 2 && rep.max_peak_to_trough >= threshold;
    return rep;
}

/// Scans Omega0 at the fixed delay plan.x_range.lo and looks for interference
/// oscillations in the final population of the last level.
inline SweepResult small_tau_oscillation_scan(const SweepPlan& plan, const SweepOptions& options = {})
{
    if (plan.axis_x != SweepAxisX::DelayTau)
        throw ConfigError("oscillation scan requires the delay axis");
    SweepPlan scan = plan;
    scan.x_range = {plan.x_range.lo, plan.x_range.lo, 1};
    if (plan.y_range.count < 1 || !(plan.y_range.lo <= plan.y_range.hi))
        throw ConfigError("oscillation scan needs an ordered Rabi-frequency range");
    scan.base_pulses.validate();
    scan.base_system.validate();
    scan.control.validate();

    const auto start = std::chrono::steady_clock::now();
    SweepResult result;
    result.plan = scan;
    const int ny = scan.y_range.count;
    result.cells.resize(static_cast<std::size_t>(ny));
    for (int iy = 0; iy < ny; ++iy) {
        auto& c = result.cells[static_cast<std::size_t>(iy)];
        c.iy = iy;
        c.x = scan.x_range.lo;
        c.y = scan.y_range.at(iy);
    }
    detail::run_cells(result.cells, scan, options);
    result.boundary_curves = boundary_curves(scan);

    std::vector<double> trace;
    for (const auto& c : result.cells)
        trace.push_back(c.status == CellStatus::Ok ? c.p_last() : std::nan(""));
    const bool complete = std::none_of(trace.begin(), trace.end(), [](double v) { return std::isnan(v); });
    result.oscillation = complete ? detect_oscillations(trace) : OscillationReport{false, true, false, {}, 0.0};

    result.metadata.control = scan.control;
    result.metadata.workers = std::max(1u, options.workers);
    result.metadata.cancelled = std::any_of(result.cells.begin(), result.cells.end(), [](const CellRecord& c) {
        return c.status == CellStatus::Cancelled;
    });
    result.metadata.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace fstirap
