// bicavity: command-line laboratory for feedback-bistable cavity cooling.
//
// Subcommands dispatch the library modules, emit plot-ready CSV/JSON data,
// and pair every run with a manifest that reproduces it bit-identically.

#include <chrono>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bicavity/analytics.hpp"
#include "bicavity/config.hpp"
#include "bicavity/core.hpp"
#include "bicavity/csvio.hpp"
#include "bicavity/dynamics.hpp"
#include "bicavity/ensemble.hpp"
#include "bicavity/manifest.hpp"
#include "bicavity/steady_state.hpp"
#include "bicavity/version.hpp"

namespace fs = std::filesystem;
using bicavity::Json;

namespace {

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    double dt = -1.0;
    double t_max = -1.0;
    long long seed = -1;
    bool compare_no_feedback = false;
};

int max_threads() {
    if (const char* env = std::getenv("BICAVITY_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 2;
}

// The manifest stores the fully resolved document, so overrides are applied
// to the JSON before parsing.
Json resolve_document(const CliOptions& opt, bool config_required) {
    Json doc = Json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in)
            throw bicavity::ConfigError("cannot open configuration file '" + opt.config_path +
                                        "'");
        try {
            doc = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw bicavity::ConfigError("configuration parse error in '" + opt.config_path +
                                        "': " + e.what());
        }
    } else if (config_required) {
        throw bicavity::ConfigError("this subcommand requires --config <file>");
    }
    if (opt.dt > 0.0) doc["sim"]["dt"] = opt.dt;
    if (opt.t_max > 0.0) doc["sim"]["t_max"] = opt.t_max;
    if (opt.seed >= 0) doc["ensemble"]["seed"] = static_cast<std::uint64_t>(opt.seed);
    return doc;
}

// Table sink honoring --format: CSV text or a {columns, rows} JSON document.
class TableSink {
  public:
    TableSink(std::vector<std::string> columns, bool json)
        : columns_(std::move(columns)), json_(json) {
        if (!json_) {
            csv_.emplace(columns_);
        } else {
            doc_["columns"] = columns_;
            doc_["rows"] = Json::array();
        }
    }

    void row(const std::vector<std::string>& cells) {
        if (csv_) {
            csv_->row(cells);
        } else {
            Json r = Json::array();
            for (const auto& c : cells) r.push_back(c);
            doc_["rows"].push_back(std::move(r));
        }
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(bicavity::format_double(v));
        row(cells);
    }

    std::string extension() const { return json_ ? ".json" : ".csv"; }

    void write(const fs::path& path) const {
        if (csv_)
            bicavity::write_file_atomic(path, csv_->contents());
        else
            bicavity::write_file_atomic(path, doc_.dump(2) + "\n");
    }

  private:
    std::vector<std::string> columns_;
    bool json_;
    std::optional<bicavity::CsvWriter> csv_;
    Json doc_;
};

const char* kPlotStub = R"(#!/usr/bin/env python3
"""Generic plotting stub: plots every numeric CSV in this directory."""
import csv, glob, os, sys

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib not available; the CSV files are plain tables")

for path in sorted(glob.glob(os.path.join(os.path.dirname(__file__) or ".", "*.csv"))):
    with open(path) as f:
        rows = list(csv.reader(f))
    if len(rows) < 3:
        continue
    header, data = rows[0], rows[1:]
    cols = {h: [] for h in header}
    for r in data:
        for h, v in zip(header, r):
            try:
                cols[h].append(float(v))
            except ValueError:
                cols[h].append(float("nan"))
    x = cols[header[0]]
    plt.figure()
    for h in header[1:]:
        if len(cols[h]) == len(x):
            plt.plot(x, cols[h], label=h)
    plt.xlabel(header[0])
    plt.legend()
    plt.title(os.path.basename(path))
    plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
    print("wrote", path.rsplit(".", 1)[0] + ".png")
)";

struct CommandResult {
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
};

void write_summary(const fs::path& path, const Json& j, std::vector<std::string>& outputs) {
    bicavity::write_file_atomic(path, j.dump(2) + "\n");
    outputs.push_back(path.string());
}

Json summary_json(const bicavity::Trajectory& traj) {
    Json j;
    j["slope"] = traj.summary.slope;
    j["slope_window"] = {traj.summary.window_t0, traj.summary.window_t1};
    j["r2"] = traj.summary.r2;
    if (traj.summary.trapped_at)
        j["trapped_at"] = *traj.summary.trapped_at;
    else
        j["trapped_at"] = nullptr;
    j["u_final"] = traj.summary.u_final;
    if (traj.summary.u_half_time)
        j["u_half_time"] = *traj.summary.u_half_time;
    else
        j["u_half_time"] = nullptr;
    j["n_events"] = traj.summary.n_events;
    j["energy_drift"] = traj.summary.energy_drift;
    j["diverged"] = traj.diverged;
    return j;
}

void write_trajectory(const bicavity::Trajectory& traj, bool adiabatic, const fs::path& path,
                      bool json_format, std::vector<std::string>& outputs) {
    std::vector<std::string> cols{"tau", "xi", "u", "j", "input_rel"};
    if (adiabatic) cols.push_back("branch");
    TableSink table(cols, json_format);
    for (std::size_t i = 0; i < traj.tau.size(); ++i) {
        std::vector<std::string> cells{
            bicavity::format_double(traj.tau[i]), bicavity::format_double(traj.xi[i]),
            bicavity::format_double(traj.u[i]), bicavity::format_double(traj.j[i]),
            bicavity::format_double(traj.input[i])};
        if (adiabatic) cells.push_back(traj.branch[i] ? "upper" : "lower");
        table.row(cells);
    }
    table.write(path);
    outputs.push_back(path.string());
}

CommandResult cmd_steady_scan(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.cavity) throw bicavity::ConfigError("missing key 'cavity' in configuration");
    const bool json = opt.format == "json";
    TableSink table({"xi", "delta_hat", "n_roots", "j1", "s1", "j2", "s2", "j3", "s3"}, json);
    const int n = cfg.scan.points;
    for (int i = 0; i < n; ++i) {
        const double xi =
            cfg.scan.xi_min + (cfg.scan.xi_max - cfg.scan.xi_min) * static_cast<double>(i) /
                                  std::max(1, n - 1);
        const auto roots = bicavity::steady_roots(xi, *cfg.cavity, cfg.curve);
        std::vector<std::string> cells{bicavity::format_double(xi),
                                       bicavity::format_double(
                                           bicavity::effective_detuning(xi, *cfg.cavity)),
                                       std::to_string(roots.size())};
        for (std::size_t k = 0; k < 3; ++k) {
            if (k < roots.size()) {
                cells.push_back(bicavity::format_double(roots[k].j));
                cells.push_back(roots[k].stable ? "1" : "0");
            } else {
                cells.push_back("");
                cells.push_back("");
            }
        }
        table.row(cells);
    }
    CommandResult res;
    const fs::path out = fs::path(opt.out_dir) / ("steady_scan" + table.extension());
    table.write(out);
    res.outputs.push_back(out.string());
    return res;
}

CommandResult cmd_hysteresis(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.cavity) throw bicavity::ConfigError("missing key 'cavity' in configuration");
    const bool json = opt.format == "json";
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(cfg.scan.points));
    for (int i = 0; i < cfg.scan.points; ++i)
        grid.push_back(cfg.scan.xi_min + (cfg.scan.xi_max - cfg.scan.xi_min) *
                                             static_cast<double>(i) /
                                             std::max(1, cfg.scan.points - 1));
    const auto trace =
        bicavity::hysteresis_trace(grid, *cfg.cavity, cfg.curve, cfg.scan.initial_branch);

    TableSink table({"xi", "j", "branch"}, json);
    for (const auto& s : trace.samples)
        table.row(std::vector<std::string>{bicavity::format_double(s.xi),
                                           bicavity::format_double(s.j),
                                           bicavity::to_string(s.branch)});
    TableSink jumps({"xi", "direction", "dj"}, json);
    for (const auto& jmp : trace.jumps)
        jumps.row(std::vector<std::string>{bicavity::format_double(jmp.xi),
                                           jmp.direction > 0 ? "up" : "down",
                                           bicavity::format_double(jmp.dj)});
    CommandResult res;
    const fs::path out = fs::path(opt.out_dir) / ("hysteresis" + table.extension());
    const fs::path outj = fs::path(opt.out_dir) / ("hysteresis_jumps" + jumps.extension());
    table.write(out);
    jumps.write(outj);
    res.outputs = {out.string(), outj.string()};
    return res;
}

CommandResult cmd_single(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.cavity) throw bicavity::ConfigError("missing key 'cavity' in configuration");
    if (cfg.sim.t_max <= 0.0)
        throw bicavity::ConfigError("missing key 'sim.t_max' in configuration");
    const bool json = opt.format == "json";
    CommandResult res;

    auto run_main = [&]() { return bicavity::simulate(cfg.sim); };
    bicavity::Trajectory traj;
    std::optional<bicavity::Trajectory> twin;
    if (opt.compare_no_feedback) {
        bicavity::SimConfig twin_cfg = cfg.sim;
        twin_cfg.curve = bicavity::FeedbackCurve::none();
        if (max_threads() >= 2) {
            auto fut = std::async(std::launch::async, run_main);
            twin = bicavity::simulate(twin_cfg);
            traj = fut.get();
        } else {
            traj = run_main();
            twin = bicavity::simulate(twin_cfg);
        }
    } else {
        traj = run_main();
    }

    const bool adiabatic = cfg.sim.mode == bicavity::SimMode::Adiabatic;
    write_trajectory(traj, adiabatic, fs::path(opt.out_dir) / (json ? "trajectory.json"
                                                                    : "trajectory.csv"),
                     json, res.outputs);
    Json summary = summary_json(traj);
    if (twin) {
        write_trajectory(*twin, adiabatic,
                         fs::path(opt.out_dir) /
                             (json ? "trajectory_no_feedback.json" : "trajectory_no_feedback.csv"),
                         json, res.outputs);
        summary["no_feedback"] = summary_json(*twin);
    }
    write_summary(fs::path(opt.out_dir) / "summary.json", summary, res.outputs);
    if (traj.diverged || (twin && twin->diverged))
        throw IntegrationError("integration produced a non-finite state; partial outputs kept");
    return res;
}

CommandResult cmd_ensemble(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.cavity) throw bicavity::ConfigError("missing key 'cavity' in configuration");
    if (cfg.ensemble.t_max <= 0.0)
        throw bicavity::ConfigError("missing key 'sim.t_max' in configuration");
    const bool json = opt.format == "json";
    auto traj = bicavity::simulate_ensemble(cfg.ensemble);
    if (cfg.smoothing.window > 0)
        traj.variance_smoothed = bicavity::variance_series(traj, cfg.smoothing.window);

    CommandResult res;
    res.seed = cfg.ensemble.seed;
    TableSink table({"tau", "variance", "variance_smoothed", "mean_ke", "j"}, json);
    for (std::size_t i = 0; i < traj.tau.size(); ++i)
        table.row(std::vector<double>{traj.tau[i], traj.variance[i], traj.variance_smoothed[i],
                                      traj.mean_ke[i], traj.j[i]});
    const fs::path out = fs::path(opt.out_dir) / ("ensemble" + table.extension());
    table.write(out);
    res.outputs.push_back(out.string());

    if (!traj.snapshots.empty()) {
        TableSink parts({"tau", "particle", "xi", "u"}, json);
        for (const auto& snap : traj.snapshots)
            for (std::size_t p = 0; p < snap.xi.size(); ++p)
                parts.row(std::vector<std::string>{bicavity::format_double(snap.tau),
                                                   std::to_string(p),
                                                   bicavity::format_double(snap.xi[p]),
                                                   bicavity::format_double(snap.u[p])});
        const fs::path outp = fs::path(opt.out_dir) / ("ensemble_particles" + parts.extension());
        parts.write(outp);
        res.outputs.push_back(outp.string());
    }

    Json summary;
    summary["var0"] = traj.summary.var0;
    summary["var_final"] = traj.summary.var_final;
    if (traj.summary.half_life)
        summary["half_life"] = *traj.summary.half_life;
    else
        summary["half_life"] = nullptr;
    summary["n_jumps"] = traj.summary.n_jumps;
    summary["energy_drift"] = traj.summary.energy_drift;
    summary["diverged"] = traj.diverged;
    write_summary(fs::path(opt.out_dir) / "summary.json", summary, res.outputs);
    if (traj.diverged)
        throw IntegrationError("integration produced a non-finite state; partial outputs kept");
    return res;
}

CommandResult cmd_analytic_report(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.cavity) throw bicavity::ConfigError("missing key 'cavity' in configuration");
    if (cfg.curve.kind == bicavity::FeedbackKind::None)
        throw bicavity::NoBistabilityError(
            "analytic-report requires a step or smooth feedback curve");
    const auto report = bicavity::step_model_report(*cfg.cavity, cfg.curve);
    const auto [lo, hi] = bicavity::swept_detuning_range(*cfg.cavity);
    Json j;
    j["delta1_hat"] = report.delta1_hat;
    j["delta2_hat"] = report.delta2_hat;
    j["de_dimless"] = report.de_dimless;
    j["f_stop_dimless"] = report.f_stop_dimless;
    j["f_stop_small_coupling"] = bicavity::stopping_force_small_coupling(*cfg.cavity);
    j["reachable"] = report.reachable;
    j["swept_detuning_range"] = {lo, hi};
    j["curve_interpreted_as_step"] = cfg.curve.kind == bicavity::FeedbackKind::Smooth;
    CommandResult res;
    write_summary(fs::path(opt.out_dir) / "analytic_report.json", j, res.outputs);
    return res;
}

CommandResult cmd_feasibility(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.feasibility)
        throw bicavity::ConfigError("missing key 'feasibility' in configuration");
    const auto& f = *cfg.feasibility;
    const auto rep = bicavity::feedback_feasibility(f.delta_i_rel, f.photon_energy, f.mean_power,
                                                    f.velocity, f.potential_period, f.switch_time,
                                                    f.ratio_threshold);
    Json j;
    j["t_m"] = rep.t_m;
    j["displacement_ratio"] = rep.displacement_ratio;
    j["v_max"] = rep.v_max;
    CommandResult res;
    write_summary(fs::path(opt.out_dir) / "feasibility.json", j, res.outputs);
    return res;
}

CommandResult cmd_dimensionless(const bicavity::RunConfig& cfg, const CliOptions& opt) {
    if (!cfg.physical) throw bicavity::ConfigError("missing key 'physical' in configuration");
    const auto scales = bicavity::to_dimensionless(*cfg.physical);
    Json j;
    j["kappa"] = scales.kappa;
    j["velocity_scale"] = scales.velocity_scale;
    if (scales.recoil_velocity > 0.0)
        j["recoil_velocity"] = scales.recoil_velocity;
    else
        j["recoil_velocity"] = nullptr;
    j["cavity"] = {{"delta_c", scales.params.delta_c},
                   {"u0", scales.params.u0},
                   {"gamma0", scales.params.gamma0},
                   {"epsilon", scales.params.epsilon}};
    CommandResult res;
    write_summary(fs::path(opt.out_dir) / "dimensionless.json", j, res.outputs);
    return res;
}

CommandResult dispatch(const std::string& name, const bicavity::RunConfig& cfg,
                       const CliOptions& opt) {
    if (name == "steady-scan") return cmd_steady_scan(cfg, opt);
    if (name == "hysteresis") return cmd_hysteresis(cfg, opt);
    if (name == "single") return cmd_single(cfg, opt);
    if (name == "ensemble") return cmd_ensemble(cfg, opt);
    if (name == "analytic-report") return cmd_analytic_report(cfg, opt);
    if (name == "feasibility-check") return cmd_feasibility(cfg, opt);
    if (name == "dimensionless") return cmd_dimensionless(cfg, opt);
    throw bicavity::ConfigError("unknown subcommand in manifest: '" + name + "'");
}

int run_command(const std::string& name, const CliOptions& opt, const Json& doc) {
    const auto t0 = std::chrono::steady_clock::now();
    bicavity::RunConfig cfg = bicavity::parse_config(doc);
    fs::create_directories(opt.out_dir);
    CommandResult res = dispatch(name, cfg, opt);
    const auto t1 = std::chrono::steady_clock::now();

    bicavity::RunManifest manifest;
    manifest.subcommand = name;
    Json stored = doc;
    stored["_run"] = {{"out_dir", opt.out_dir},
                      {"format", opt.format},
                      {"compare_no_feedback", opt.compare_no_feedback}};
    manifest.resolved_config = stored;
    manifest.seed = res.seed;
    manifest.outputs = res.outputs;
    manifest.duration_seconds = std::chrono::duration<double>(t1 - t0).count();
    bicavity::write_manifest((fs::path(opt.out_dir) / "manifest.json").string(), manifest);
    bicavity::write_file_atomic((fs::path(opt.out_dir) / "plot.py").string(), kPlotStub);

    for (const auto& o : res.outputs) std::cout << o << "\n";
    return 0;
}

int run_manifest(const std::string& manifest_path, CliOptions opt, bool out_dir_overridden) {
    std::ifstream in(manifest_path);
    if (!in) throw bicavity::ConfigError("cannot open manifest '" + manifest_path + "'");
    Json mj;
    try {
        mj = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw bicavity::ConfigError("manifest parse error: " + std::string(e.what()));
    }
    const auto manifest = bicavity::manifest_from_json(mj);
    Json doc = manifest.resolved_config;
    if (doc.contains("_run")) {
        if (!out_dir_overridden) opt.out_dir = doc["_run"].value("out_dir", opt.out_dir);
        opt.format = doc["_run"].value("format", opt.format);
        opt.compare_no_feedback = doc["_run"].value("compare_no_feedback", false);
        doc.erase("_run");
    }
    return run_command(manifest.subcommand, opt, doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bicavity: numerical laboratory for cavity cooling with intensity feedback"};
    app.set_version_flag("--version", bicavity::kVersion);
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON configuration file")
        ->envname("BICAVITY_CONFIG");
    app.add_option("--out-dir", opt.out_dir, "output directory (default: current)");
    app.add_option("--format", opt.format, "table output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--dt", opt.dt, "override sim.dt");
    app.add_option("--t-max", opt.t_max, "override sim.t_max");
    app.add_option("--seed", opt.seed, "override ensemble.seed");

    auto* scan = app.add_subcommand(
        "steady-scan", "per-position steady-state root table (CSV: xi, delta_hat, n_roots, "
                       "j1, s1, j2, s2, j3, s3)");
    auto* hyst = app.add_subcommand(
        "hysteresis", "adiabatic branch trace over a position grid (CSV: xi, j, branch) plus a "
                      "jump table (xi, direction, dj)");
    auto* single = app.add_subcommand(
        "single", "single-particle run (CSV: tau, xi, u, j, input_rel[, branch]; JSON summary: "
                  "slope, slope_window, trapped_at, u_final)");
    single->add_flag("--compare-no-feedback", opt.compare_no_feedback,
                     "also run the delta_i = 0 twin and emit both trajectories");
    std::string mode_override;
    single->add_option("--mode", mode_override, "override sim.mode: full or adiabatic")
        ->check(CLI::IsMember({"full", "adiabatic"}));
    auto* ens = app.add_subcommand(
        "ensemble", "N-particle run (CSV: tau, variance, variance_smoothed, mean_ke, j; JSON "
                    "summary: var0, var_final, half_life, n_jumps)");
    auto* rep = app.add_subcommand("analytic-report",
                                   "step-model predictions (JSON: delta1_hat, delta2_hat, "
                                   "de_dimless, f_stop_dimless, reachable)");
    auto* feas = app.add_subcommand("feasibility-check",
                                    "feedback-loop feasibility (JSON: t_m, displacement_ratio, "
                                    "v_max)");
    struct {
        double delta_i_rel = 0, photon_energy = 0, mean_power = 0, velocity = 0,
               potential_period = 0, switch_time = 0, ratio_threshold = -1;
    } ff;
    feas->add_option("--delta-i-rel", ff.delta_i_rel, "relative modulation depth dI/I0");
    feas->add_option("--photon-energy", ff.photon_energy, "photon energy, J");
    feas->add_option("--mean-power", ff.mean_power, "mean incident power P0, W");
    feas->add_option("--velocity", ff.velocity, "particle velocity, m/s");
    feas->add_option("--potential-period", ff.potential_period,
                     "optical-potential period (Lambda/2), m");
    feas->add_option("--switch-time", ff.switch_time, "electro-optic switching time, s");
    feas->add_option("--ratio-threshold", ff.ratio_threshold,
                     "displacement/period budget for v_max (default 0.1)");
    auto* dimless = app.add_subcommand(
        "dimensionless", "physical -> dimensionless conversion (JSON: kappa, velocity_scale, "
                         "recoil_velocity, cavity block)");
    auto* rerun = app.add_subcommand("run", "re-execute a run manifest bit-identically");
    std::string manifest_path;
    rerun->add_option("manifest", manifest_path, "manifest.json from a previous run")
        ->required();
    (void)scan;
    (void)hyst;
    (void)ens;
    (void)rep;
    (void)dimless;

    CLI11_PARSE(app, argc, argv);

    try {
        if (rerun->parsed())
            return run_manifest(manifest_path, opt, app.count("--out-dir") > 0);
        const std::string name = app.get_subcommands().front()->get_name();
        const bool config_required = name != "feasibility-check";
        Json doc = resolve_document(opt, config_required);
        if (single->parsed() && !mode_override.empty()) doc["sim"]["mode"] = mode_override;
        if (feas->parsed()) {
            auto set = [&](const char* key, double v) {
                if (v > 0.0) doc["feasibility"][key] = v;
            };
            set("delta_i_rel", ff.delta_i_rel);
            set("photon_energy", ff.photon_energy);
            set("mean_power", ff.mean_power);
            set("velocity", ff.velocity);
            set("potential_period", ff.potential_period);
            set("switch_time", ff.switch_time);
            set("ratio_threshold", ff.ratio_threshold);
        }
        return run_command(name, opt, doc);
    } catch (const bicavity::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const bicavity::NoBistabilityError& e) {
        std::cerr << "infeasible analytic request: " << e.what() << "\n";
        return 4;
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
