#pragma once

// Command-line front end: `simulate`, `darkstate`, `diagnose`, `sweep`.
//
// Every flag maps onto a key of the JSON config file. The file is read first,
// flags are written over it, and the merged document is parsed strictly
// (unknown keys and sections foreign to the command are rejected). All times
// are in units of T and all frequencies in units of 1/T.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fstirap/diagnostics.hpp"
#include "fstirap/io.hpp"
#include "fstirap/propagator.hpp"
#include "fstirap/sweeps.hpp"
#include "fstirap/system.hpp"

namespace fstirap::cli {

using nlohmann::json;

enum ExitCode : int {
    kExitOk = 0,
    kExitNotAdiabatic = 1,
    kExitConfig = 2,
    kExitIntegration = 3,
    kExitNoWindow = 4,
    kExitCancelled = 130,
};

enum class Command { Simulate, DarkState, Diagnose, Sweep };

inline std::string to_string(Command c)
{
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::DarkState: return "darkstate";
    case Command::Diagnose: return "diagnose";
    case Command::Sweep: return "sweep";
    }
    return "?";
}

struct OutputPaths {
    std::string trajectory = "trajectory.csv";
    std::string summary;  // empty: stdout only
    std::string csv = "sweep.csv";
    std::string json = "sweep.json";
};

struct RunConfig {
    Command command = Command::Simulate;
    SystemSpec system;
    PulseSpec pulses;
    IntegratorControl integrator;
    std::optional<TimeWindow> window;
    double dark_ratio = 1.0;
    double dark_beta = 0.0;
    double n_adiabatic = kDefaultAdiabaticity;
    std::optional<SweepPlan> sweep;
    bool oscillation_scan = false;
    std::optional<unsigned> workers;
    OutputPaths output;

    /// Fully resolved configuration, echoed into every JSON output.
    json effective() const;
};

// ---- strict config parsing ----------------------------------------------

namespace detail {

inline std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] inline void field_error(const std::string& path, const std::string& what)
{
    throw ConfigError("config field '" + path + "': " + what);
}

inline void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    if (!obj.is_object())
        field_error(path, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            field_error(join(path, key), "unknown key");
}

inline double get_number(const json& obj, const std::string& key, const std::string& path, double fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        field_error(join(path, key), "expected a number");
    return v.get<double>();
}

inline long long get_integer(const json& obj, const std::string& key, const std::string& path, long long fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (v.is_number_integer())
        return v.get<long long>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
        return static_cast<long long>(v.get<double>());
    field_error(join(path, key), "expected an integer");
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path,
                              const std::string& fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_string())
        field_error(join(path, key), "expected a string");
    return v.get<std::string>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean())
        field_error(join(path, key), "expected true or false");
    return v.get<bool>();
}

inline const json& section(const json& doc, const std::string& name)
{
    static const json empty = json::object();
    return doc.contains(name) ? doc.at(name) : empty;
}

inline std::set<std::string> allowed_sections(Command c)
{
    switch (c) {
    case Command::Simulate: return {"system", "pulses", "integrator", "output"};
    case Command::DarkState: return {"system", "darkstate", "output"};
    case Command::Diagnose: return {"system", "pulses", "diagnostics", "output"};
    case Command::Sweep: return {"workers", "system", "pulses", "integrator", "diagnostics", "sweep", "output"};
    }
    return {};
}

inline std::set<std::string> allowed_outputs(Command c)
{
    switch (c) {
    case Command::Simulate: return {"trajectory", "summary"};
    case Command::DarkState: return {"summary"};
    case Command::Diagnose: return {"summary"};
    case Command::Sweep: return {"csv", "json"};
    }
    return {};
}

inline SystemSpec parse_system(const json& s)
{
    check_keys(s, "system", {"kind", "delta", "J", "Jp", "initial_m"});
    const bool chain_keys = s.contains("J") || s.contains("Jp") || s.contains("initial_m");
    const std::string kind = get_string(s, "kind", "system", chain_keys ? "chain" : "three_state");
    SystemSpec spec;
    spec.detuning_delta = get_number(s, "delta", "system", 0.0);
    if (kind == "three_state") {
        if (chain_keys)
            field_error("system.kind", "J/Jp/initial_m only apply to kind 'chain'");
        spec.kind = SystemKind::ThreeState;
    } else if (kind == "chain") {
        spec.kind = SystemKind::Chain;
        spec.j_lower = static_cast<int>(get_integer(s, "J", "system", 1));
        spec.j_upper = static_cast<int>(get_integer(s, "Jp", "system", spec.j_lower - 1));
        spec.initial_m = static_cast<int>(get_integer(s, "initial_m", "system", -spec.j_lower));
    } else {
        field_error("system.kind", "expected 'three_state' or 'chain', got '" + kind + "'");
    }
    spec.validate();
    return spec;
}

inline PulseSpec parse_pulses(const json& p)
{
    check_keys(p, "pulses", {"shape", "omega0T", "tau", "alpha", "p3", "phase_p", "phase_s", "trunc_a"});
    PulseSpec spec;
    const std::string shape = get_string(p, "shape", "pulses", "smooth");
    if (shape == "smooth")
        spec.shape = PulseShape::Smooth;
    else if (shape == "truncated")
        spec.shape = PulseShape::Truncated;
    else
        field_error("pulses.shape", "expected 'smooth' or 'truncated', got '" + shape + "'");
    spec.width_T = 1.0;
    spec.omega0 = get_number(p, "omega0T", "pulses", spec.omega0);
    spec.delay_tau = get_number(p, "tau", "pulses", spec.delay_tau);
    if (p.contains("alpha") && p.contains("p3"))
        field_error("pulses.p3", "give either alpha or p3, not both");
    if (p.contains("p3")) {
        const double p3 = get_number(p, "p3", "pulses", 0.5);
        if (!(p3 >= 0.0 && p3 <= 1.0))
            field_error("pulses.p3", "target population must lie in [0, 1]");
        spec.mix_alpha = std::asin(std::sqrt(p3));
    } else {
        spec.mix_alpha = get_number(p, "alpha", "pulses", spec.mix_alpha);
    }
    spec.phase_p = get_number(p, "phase_p", "pulses", 0.0);
    spec.phase_s = get_number(p, "phase_s", "pulses", 0.0);
    spec.trunc_a = get_number(p, "trunc_a", "pulses", 0.5);
    spec.validate();
    return spec;
}

inline AxisRange parse_range(const json& r, const std::string& path, AxisRange fallback)
{
    check_keys(r, path, {"lo", "hi", "count"});
    AxisRange out;
    out.lo = get_number(r, "lo", path, fallback.lo);
    out.hi = get_number(r, "hi", path, fallback.hi);
    out.count = static_cast<int>(get_integer(r, "count", path, fallback.count));
    return out;
}

inline Observable parse_observable(const std::string& name, const std::string& path)
{
    static const std::map<std::string, Observable> names{
        {"populations", Observable::Populations},   {"alpha_measured", Observable::AlphaMeasured},
        {"beta_measured", Observable::BetaMeasured}, {"max_p2", Observable::MaxP2},
        {"dark_overlap_min", Observable::DarkOverlapMin}};
    const auto it = names.find(name);
    if (it == names.end())
        field_error(path, "unknown observable '" + name + "'");
    return it->second;
}

} // namespace detail

/// Parses a merged config document for one command. Throws ConfigError.
inline RunConfig parse_config(const json& doc, Command command)
{
    using namespace detail;
    if (!doc.is_object())
        throw ConfigError("config root must be an object");
    const auto allowed = allowed_sections(command);
    for (const auto& [key, _] : doc.items())
        if (!allowed.count(key))
            field_error(key, "not used by the '" + to_string(command) + "' command");

    RunConfig cfg;
    cfg.command = command;
    cfg.system = parse_system(section(doc, "system"));
    if (allowed.count("pulses"))
        cfg.pulses = parse_pulses(section(doc, "pulses"));

    if (allowed.count("integrator")) {
        const json& in = section(doc, "integrator");
        check_keys(in, "integrator", {"tolerance", "max_steps", "output_points", "t0", "t1"});
        cfg.integrator.tolerance = get_number(in, "tolerance", "integrator", cfg.integrator.tolerance);
        const auto max_steps = get_integer(in, "max_steps", "integrator", static_cast<long long>(cfg.integrator.max_steps));
        const auto points = get_integer(in, "output_points", "integrator", static_cast<long long>(cfg.integrator.output_points));
        if (max_steps <= 0)
            field_error("integrator.max_steps", "must be positive");
        if (points < 0)
            field_error("integrator.output_points", "must be nonnegative");
        cfg.integrator.max_steps = static_cast<std::size_t>(max_steps);
        cfg.integrator.output_points = static_cast<std::size_t>(points);
        try {
            cfg.integrator.validate();
        } catch (const ConfigError& e) {
            field_error("integrator", e.what());
        }
        if (in.contains("t0") || in.contains("t1")) {
            TimeWindow w = default_window(cfg.pulses);
            w.t0 = get_number(in, "t0", "integrator", w.t0);
            w.t1 = get_number(in, "t1", "integrator", w.t1);
            if (!(w.t0 < w.t1))
                field_error("integrator.t1", "window requires t0 < t1");
            cfg.window = w;
        }
    }

    if (allowed.count("darkstate")) {
        const json& d = section(doc, "darkstate");
        check_keys(d, "darkstate", {"ratio", "beta"});
        cfg.dark_ratio = get_number(d, "ratio", "darkstate", 1.0);
        cfg.dark_beta = get_number(d, "beta", "darkstate", 0.0);
        if (!(cfg.dark_ratio >= 0.0) || !std::isfinite(cfg.dark_ratio))
            field_error("darkstate.ratio", "must be finite and >= 0");
    }

    if (allowed.count("diagnostics")) {
        const json& d = section(doc, "diagnostics");
        check_keys(d, "diagnostics", {"n"});
        cfg.n_adiabatic = get_number(d, "n", "diagnostics", kDefaultAdiabaticity);
        if (!(cfg.n_adiabatic >= 1.0))
            field_error("diagnostics.n", "must be >= 1");
    }

    if (command == Command::Sweep) {
        if (doc.contains("workers")) {
            const auto w = get_integer(doc, "workers", "", 1);
            if (w < 1)
                field_error("workers", "must be >= 1");
            cfg.workers = static_cast<unsigned>(w);
        }
        const json& s = section(doc, "sweep");
        check_keys(s, "sweep", {"x_axis", "y_axis", "x_range", "y_range", "observables", "oscillation_scan"});
        SweepPlan plan;
        const std::string x = get_string(s, "x_axis", "sweep", "delay_tau");
        if (x == "delay_tau")
            plan.axis_x = SweepAxisX::DelayTau;
        else if (x == "detuning_delta")
            plan.axis_x = SweepAxisX::DetuningDelta;
        else
            field_error("sweep.x_axis", "expected 'delay_tau' or 'detuning_delta'");
        const bool detuning = plan.axis_x == SweepAxisX::DetuningDelta;
        const std::string y = get_string(s, "y_axis", "sweep", detuning ? "omega0_squared" : "omega0");
        if (y == "omega0")
            plan.axis_y = SweepAxisY::Omega0;
        else if (y == "omega0_squared")
            plan.axis_y = SweepAxisY::Omega0Squared;
        else
            field_error("sweep.y_axis", "expected 'omega0' or 'omega0_squared'");
        const AxisRange x_default = detuning ? AxisRange{0.0, 500.0, 41} : AxisRange{0.1, 1.6, 41};
        const AxisRange y_default = plan.axis_y == SweepAxisY::Omega0 ? AxisRange{2.0, 60.0, 41}
                                                                       : AxisRange{100.0, 3600.0, 41};
        plan.x_range = parse_range(section(s, "x_range"), "sweep.x_range", x_default);
        plan.y_range = parse_range(section(s, "y_range"), "sweep.y_range", y_default);
        if (s.contains("observables")) {
            const json& obs = s.at("observables");
            if (!obs.is_array())
                field_error("sweep.observables", "expected an array of names");
            plan.observables.clear();
            for (const auto& o : obs) {
                if (!o.is_string())
                    field_error("sweep.observables", "expected an array of names");
                plan.observables.push_back(parse_observable(o.get<std::string>(), "sweep.observables"));
            }
        }
        cfg.oscillation_scan = get_bool(s, "oscillation_scan", "sweep", false);
        plan.base_pulses = cfg.pulses;
        plan.base_system = cfg.system;
        plan.control = cfg.integrator;
        plan.control.output_points = 0;
        plan.n_adiabatic = cfg.n_adiabatic;
        if (cfg.oscillation_scan) {
            if (plan.axis_x != SweepAxisX::DelayTau)
                field_error("sweep.oscillation_scan", "requires x_axis 'delay_tau'");
            if (plan.y_range.count < 1 || !(plan.y_range.lo < plan.y_range.hi))
                field_error("sweep.y_range", "needs lo < hi");
        } else {
            try {
                plan.validate();
            } catch (const ConfigError& e) {
                field_error("sweep", e.what());
            }
        }
        cfg.sweep = plan;
    }

    const json& out = section(doc, "output");
    check_keys(out, "output", allowed_outputs(command));
    cfg.output.trajectory = get_string(out, "trajectory", "output", cfg.output.trajectory);
    cfg.output.summary = get_string(out, "summary", "output", cfg.output.summary);
    cfg.output.csv = get_string(out, "csv", "output", cfg.output.csv);
    cfg.output.json = get_string(out, "json", "output", cfg.output.json);
    return cfg;
}

inline json RunConfig::effective() const
{
    json j;
    j["command"] = to_string(command);
    j["system"] = io::to_json(system);
    switch (command) {
    case Command::Simulate:
        j["pulses"] = io::to_json(pulses);
        j["integrator"] = io::to_json(integrator);
        if (window)
            j["integrator"]["window"] = {window->t0, window->t1};
        j["output"] = {{"trajectory", output.trajectory}, {"summary", output.summary}};
        break;
    case Command::DarkState:
        j["darkstate"] = {{"ratio", dark_ratio}, {"beta", dark_beta}};
        j["output"] = {{"summary", output.summary}};
        break;
    case Command::Diagnose:
        j["pulses"] = io::to_json(pulses);
        j["diagnostics"] = {{"n", n_adiabatic}};
        j["output"] = {{"summary", output.summary}};
        break;
    case Command::Sweep:
        j["pulses"] = io::to_json(pulses);
        j["integrator"] = io::to_json(integrator);
        j["diagnostics"] = {{"n", n_adiabatic}};
        if (sweep)
            j["sweep"] = io::to_json(*sweep);
        j["sweep"]["oscillation_scan"] = oscillation_scan;
        j["output"] = {{"csv", output.csv}, {"json", output.json}};
        break;
    }
    return j;
}

/// Reads a JSON config file; syntax errors report line and column.
inline json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

// ---- commands ------------------------------------------------------------

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path + "'");
    f << text;
}

inline void emit_summary(const RunConfig& cfg, const json& doc, Streams io_streams)
{
    const std::string text = doc.dump(2) + "\n";
    io_streams.out << text;
    if (!cfg.output.summary.empty())
        write_text_file(cfg.output.summary, text);
}

inline std::atomic<bool>& cancel_flag()
{
    static std::atomic<bool> flag{false};
    return flag;
}

extern "C" inline void on_cancel_signal(int) { cancel_flag().store(true); }

} // namespace detail

inline int cmd_simulate(const RunConfig& cfg, Streams s)
{
    json doc;
    doc["command"] = "simulate";
    doc["config"] = cfg.effective();
    auto write_trajectory = [&](const PropagationResult& r) {
        if (cfg.output.trajectory.empty())
            return;
        std::ostringstream csv;
        io::write_trajectory_csv(csv, r);
        detail::write_text_file(cfg.output.trajectory, csv.str());
    };
    try {
        const auto result = propagate(cfg.system, cfg.pulses, cfg.window, cfg.integrator);
        write_trajectory(result);
        doc["status"] = "ok";
        doc["summary"] = io::summary_json(result, final_superposition(result));
        detail::emit_summary(cfg, doc, s);
        return kExitOk;
    } catch (const IntegrationFailure& e) {
        write_trajectory(e.partial());
        doc["status"] = "integration_failure";
        doc["partial"] = true;
        doc["error"] = e.what();
        doc["summary"] = io::summary_json(e.partial(), final_superposition(e.partial()));
        detail::emit_summary(cfg, doc, s);
        s.err << "error: integration failed: " << e.what() << '\n';
        return kExitIntegration;
    }
}

inline int cmd_darkstate(const RunConfig& cfg, Streams s)
{
    json doc;
    doc["command"] = "darkstate";
    doc["config"] = cfg.effective();
    try {
        const DarkState d = dark_state_chain(cfg.system, cfg.dark_ratio, cfg.dark_beta);
        std::optional<std::vector<ExactCG>> exact;
        if (cfg.dark_ratio == 1.0 && cfg.dark_beta == 0.0)
            exact = dark_state_exact_squares(cfg.system);
        doc["status"] = "ok";
        doc["dark_state"] = io::to_json(d, cfg.system, exact);
        detail::emit_summary(cfg, doc, s);
        return kExitOk;
    } catch (const RecurrenceBreakdown& e) {
        doc["status"] = "recurrence_breakdown";
        doc["error"] = e.what();
        doc["m"] = e.m();
        detail::emit_summary(cfg, doc, s);
        s.err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

inline int cmd_diagnose(const RunConfig& cfg, Streams s)
{
    if (cfg.pulses.shape != PulseShape::Smooth)
        throw ConfigError("diagnose requires the smooth pulse shape");
    const DiagnosticsReport report = diagnose(cfg.pulses, cfg.system.detuning_delta, cfg.n_adiabatic);
    json doc;
    doc["command"] = "diagnose";
    doc["config"] = cfg.effective();
    doc["report"] = io::to_json(report);
    int code = kExitOk;
    if (!report.adiabatic_window) {
        doc["status"] = "no_adiabatic_window";
        code = kExitNoWindow;
        s.err << "error: no adiabatic window: tau upper bound " << report.tau_max.value_or(0.0)
              << " does not exceed lower bound " << report.tau_min << '\n';
    } else if (!report.verdicts.adiabatic()) {
        doc["status"] = "not_adiabatic";
        code = kExitNotAdiabatic;
    } else {
        doc["status"] = "adiabatic";
    }
    detail::emit_summary(cfg, doc, s);
    return code;
}

inline unsigned resolve_workers(const RunConfig& cfg, std::optional<unsigned> flag)
{
    if (flag)
        return std::max(1u, *flag);
    if (const char* env = std::getenv("FSTIRAP_WORKERS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("FSTIRAP_WORKERS must be a positive integer, got '") + env + "'");
    }
    if (cfg.workers)
        return *cfg.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline int cmd_sweep(const RunConfig& cfg, Streams s, unsigned workers)
{
    auto& cancel = detail::cancel_flag();
    cancel.store(false);
    auto old_int = std::signal(SIGINT, detail::on_cancel_signal);
    auto old_term = std::signal(SIGTERM, detail::on_cancel_signal);

    std::mutex progress_mutex;
    std::size_t last_percent = 101;
    SweepOptions options;
    options.workers = workers;
    options.cancel = &cancel;
    options.progress = [&](std::size_t done, std::size_t total) {
        const std::size_t percent = done * 100 / total;
        std::lock_guard lock(progress_mutex);
        if (percent != last_percent) {
            last_percent = percent;
            s.err << "\rsweep: " << done << "/" << total << " cells" << std::flush;
        }
    };

    const SweepResult result = cfg.oscillation_scan ? small_tau_oscillation_scan(*cfg.sweep, options)
                                                    : run_sweep(*cfg.sweep, options);
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    s.err << '\n';

    std::ostringstream csv;
    io::write_sweep_csv(csv, result);
    detail::write_text_file(cfg.output.csv, csv.str());
    json sidecar = io::sweep_sidecar_json(result);
    sidecar["config"] = cfg.effective();
    detail::write_text_file(cfg.output.json, sidecar.dump(2) + "\n");

    json doc;
    doc["command"] = "sweep";
    doc["config"] = cfg.effective();
    doc["cells"] = result.cells.size();
    doc["failed_cells"] = result.failed_cells();
    doc["cancelled"] = result.metadata.cancelled;
    doc["csv"] = cfg.output.csv;
    doc["json"] = cfg.output.json;
    if (result.oscillation)
        doc["oscillation"] = sidecar["oscillation"];
    doc["status"] = result.metadata.cancelled ? "cancelled" : "ok";
    s.out << doc.dump(2) << '\n';
    if (result.failed_cells() > 0)
        s.err << "warning: " << result.failed_cells() << " cell(s) failed\n";
    return result.metadata.cancelled ? kExitCancelled : kExitOk;
}

// ---- argv front end ------------------------------------------------------

namespace detail {

// Flag value, its config path, and whether it overrides a sibling key.
struct FlagBinding {
    std::vector<std::string> path;
    std::string clears; // sibling key removed when this flag is applied
};

inline void set_path(json& doc, const FlagBinding& b, const json& value)
{
    json* node = &doc;
    for (std::size_t i = 0; i + 1 < b.path.size(); ++i) {
        if (!node->contains(b.path[i]) || !(*node)[b.path[i]].is_object())
            (*node)[b.path[i]] = json::object();
        node = &(*node)[b.path[i]];
    }
    if (!b.clears.empty())
        node->erase(b.clears);
    (*node)[b.path.back()] = value;
}

} // namespace detail

/// Full CLI entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"fstirap: fractional STIRAP simulation and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolkitVersion);

    struct DoubleFlag { std::optional<double> value; detail::FlagBinding binding; };
    struct IntFlag { std::optional<long long> value; detail::FlagBinding binding; };
    struct StringFlag { std::optional<std::string> value; detail::FlagBinding binding; };

    // Flags live in per-subcommand lists so each subcommand accepts only its own.
    std::map<CLI::App*, std::vector<std::unique_ptr<DoubleFlag>>> doubles;
    std::map<CLI::App*, std::vector<std::unique_ptr<IntFlag>>> ints;
    std::map<CLI::App*, std::vector<std::unique_ptr<StringFlag>>> strings;
    std::map<CLI::App*, std::optional<std::string>> config_paths;
    std::map<CLI::App*, std::optional<std::string>> seeds;
    std::optional<long long> workers_flag;
    bool oscillation_flag = false;

    auto add_double = [&](CLI::App* sub, const std::string& name, std::vector<std::string> path,
                          const std::string& help, std::string clears = {}) {
        auto f = std::make_unique<DoubleFlag>();
        f->binding = {std::move(path), std::move(clears)};
        sub->add_option(name, f->value, help);
        doubles[sub].push_back(std::move(f));
    };
    auto add_int = [&](CLI::App* sub, const std::string& name, std::vector<std::string> path, const std::string& help) {
        auto f = std::make_unique<IntFlag>();
        f->binding = {std::move(path), {}};
        sub->add_option(name, f->value, help);
        ints[sub].push_back(std::move(f));
    };
    auto add_string = [&](CLI::App* sub, const std::string& name, std::vector<std::string> path,
                          const std::string& help) {
        auto f = std::make_unique<StringFlag>();
        f->binding = {std::move(path), {}};
        sub->add_option(name, f->value, help);
        strings[sub].push_back(std::move(f));
    };

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_paths[sub], "JSON config file");
        sub->add_option("--seed", seeds[sub], "rejected: there are no stochastic components");
        add_string(sub, "--kind", {"system", "kind"}, "three_state | chain");
        add_double(sub, "--delta", {"system", "delta"}, "upper-level detuning (units of 1/T)");
        add_int(sub, "--J", {"system", "J"}, "lower-level angular momentum (chain)");
        add_int(sub, "--Jp", {"system", "Jp"}, "upper-level angular momentum, J or J-1 (chain)");
        add_int(sub, "--initial-m", {"system", "initial_m"}, "initial sublevel, must be -J (chain)");
    };
    auto add_pulses = [&](CLI::App* sub) {
        add_string(sub, "--shape", {"pulses", "shape"}, "smooth | truncated");
        add_double(sub, "--omega0T", {"pulses", "omega0T"}, "peak Rabi frequency times T");
        add_double(sub, "--tau", {"pulses", "tau"}, "pulse delay in units of T");
        add_double(sub, "--alpha", {"pulses", "alpha"}, "mixing angle (rad)", "p3");
        add_double(sub, "--p3", {"pulses", "p3"}, "target final population, alpha = asin(sqrt(p3))", "alpha");
        add_double(sub, "--phase-p", {"pulses", "phase_p"}, "pump phase (rad)");
        add_double(sub, "--phase-s", {"pulses", "phase_s"}, "Stokes phase (rad)");
        add_double(sub, "--trunc-a", {"pulses", "trunc_a"}, "Stokes width ratio a of the truncated shape");
    };
    auto add_integrator = [&](CLI::App* sub) {
        add_double(sub, "--tolerance", {"integrator", "tolerance"}, "local error tolerance");
        add_int(sub, "--max-steps", {"integrator", "max_steps"}, "step budget");
        add_int(sub, "--output-points", {"integrator", "output_points"}, "stored trajectory points");
        add_double(sub, "--t0", {"integrator", "t0"}, "window start (units of T)");
        add_double(sub, "--t1", {"integrator", "t1"}, "window end (units of T)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "propagate the Schroedinger equation");
    add_common(simulate);
    add_pulses(simulate);
    add_integrator(simulate);
    add_string(simulate, "--trajectory", {"output", "trajectory"}, "trajectory CSV path ('' to skip)");
    add_string(simulate, "--summary", {"output", "summary"}, "also write the summary JSON here");

    CLI::App* darkstate = app.add_subcommand("darkstate", "trapped-state amplitudes");
    add_common(darkstate);
    add_double(darkstate, "--ratio", {"darkstate", "ratio"}, "pump/Stokes ratio tan(alpha)");
    add_double(darkstate, "--beta", {"darkstate", "beta"}, "relative phase phiP + phiS");
    add_string(darkstate, "--summary", {"output", "summary"}, "also write the JSON here");

    CLI::App* diag = app.add_subcommand("diagnose", "closed-form adiabaticity bounds");
    add_common(diag);
    add_pulses(diag);
    add_double(diag, "--n", {"diagnostics", "n"}, "adiabaticity factor n");
    add_string(diag, "--summary", {"output", "summary"}, "also write the JSON here");

    CLI::App* sweep = app.add_subcommand("sweep", "2-D parameter scan");
    add_common(sweep);
    add_pulses(sweep);
    add_integrator(sweep);
    add_double(sweep, "--n", {"diagnostics", "n"}, "adiabaticity factor n for the boundary curves");
    sweep->add_option("--workers", workers_flag, "worker threads (env FSTIRAP_WORKERS)");
    add_string(sweep, "--x-axis", {"sweep", "x_axis"}, "delay_tau | detuning_delta");
    add_string(sweep, "--y-axis", {"sweep", "y_axis"}, "omega0 | omega0_squared");
    add_double(sweep, "--x-lo", {"sweep", "x_range", "lo"}, "x axis start");
    add_double(sweep, "--x-hi", {"sweep", "x_range", "hi"}, "x axis end");
    add_int(sweep, "--x-count", {"sweep", "x_range", "count"}, "x axis points");
    add_double(sweep, "--y-lo", {"sweep", "y_range", "lo"}, "y axis start");
    add_double(sweep, "--y-hi", {"sweep", "y_range", "hi"}, "y axis end");
    add_int(sweep, "--y-count", {"sweep", "y_range", "count"}, "y axis points");
    add_string(sweep, "--observables", {"sweep", "observables"}, "comma-separated observable names");
    sweep->add_flag("--oscillation-scan", oscillation_flag, "scan Omega0 at fixed tau = x-lo for oscillations");
    add_string(sweep, "--csv", {"output", "csv"}, "per-cell CSV path");
    add_string(sweep, "--json", {"output", "json"}, "JSON sidecar path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const Command command = sub == simulate    ? Command::Simulate
                            : sub == darkstate ? Command::DarkState
                            : sub == diag      ? Command::Diagnose
                                               : Command::Sweep;
    try {
        if (seeds[sub])
            throw ConfigError("--seed is not supported: the toolkit has no stochastic components");
        json doc = config_paths[sub] ? load_config_file(*config_paths[sub]) : json::object();
        if (!doc.is_object())
            throw ConfigError("config root must be an object");
        if (doc.contains("seed"))
            throw ConfigError("config field 'seed' is not supported: the toolkit has no stochastic components");

        int target_flags = 0;
        for (const auto& f : doubles[sub])
            if (f->value && !f->binding.clears.empty())
                ++target_flags;
        if (target_flags > 1)
            throw ConfigError("give either --alpha or --p3, not both");
        for (const auto& f : doubles[sub])
            if (f->value)
                detail::set_path(doc, f->binding, *f->value);
        for (const auto& f : ints[sub])
            if (f->value)
                detail::set_path(doc, f->binding, *f->value);
        for (const auto& f : strings[sub]) {
            if (!f->value)
                continue;
            if (f->binding.path.back() == "observables") {
                json arr = json::array();
                std::stringstream ss(*f->value);
                for (std::string item; std::getline(ss, item, ',');)
                    if (!item.empty())
                        arr.push_back(item);
                detail::set_path(doc, f->binding, arr);
            } else {
                detail::set_path(doc, f->binding, *f->value);
            }
        }
        if (oscillation_flag)
            detail::set_path(doc, {{"sweep", "oscillation_scan"}, {}}, true);
        if (command == Command::Sweep && workers_flag && *workers_flag < 1)
            throw ConfigError("--workers must be >= 1");

        const RunConfig cfg = parse_config(doc, command);
        switch (command) {
        case Command::Simulate: return cmd_simulate(cfg, {out, err});
        case Command::DarkState: return cmd_darkstate(cfg, {out, err});
        case Command::Diagnose: return cmd_diagnose(cfg, {out, err});
        case Command::Sweep: {
            std::optional<unsigned> w;
            if (workers_flag)
                w = static_cast<unsigned>(*workers_flag);
            return cmd_sweep(cfg, {out, err}, resolve_workers(cfg, w));
        }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

} // namespace fstirap::cli
