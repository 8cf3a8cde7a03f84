#pragma once

// JSON configuration loading with strict key validation.  Unknown keys are
// hard errors so typos in physics parameters cannot pass silently.

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bicavity/core.hpp"
#include "bicavity/dynamics.hpp"
#include "bicavity/ensemble.hpp"

namespace bicavity {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

struct ScanConfig {
    double xi_min = 0.0;
    double xi_max = 1.0;
    int points = 4096;
    Branch initial_branch = Branch::Upper;
};

struct SmoothingConfig {
    int window = 0;  // 0 = auto (max(3, 1% of samples, odd))
};

struct FeasibilityConfig {
    double delta_i_rel = 0.0;
    double photon_energy = 0.0;    // J
    double mean_power = 0.0;       // W
    double velocity = 0.0;         // m/s
    double potential_period = 0.0; // m
    double switch_time = 0.0;      // s
    double ratio_threshold = 0.1;
};

// Everything a subcommand may need, parsed from one file.
struct RunConfig {
    std::string description;
    std::optional<CavityParams> cavity;
    FeedbackCurve curve = FeedbackCurve::none();
    std::optional<PhysicalParams> physical;
    SimConfig sim;          // params/curve filled from the blocks above
    EnsembleConfig ensemble;
    ScanConfig scan;
    SmoothingConfig smoothing;
    std::optional<FeasibilityConfig> feasibility;
    Json raw;  // resolved document, re-serialized into manifests
};

namespace detail {

inline void require_known_keys(const Json& obj, const std::set<std::string>& known,
                               const std::string& section) {
    for (const auto& item : obj.items()) {
        if (!known.count(item.key()))
            throw ConfigError("unknown key '" + (section.empty() ? item.key()
                                                                 : section + "." + item.key()) +
                              "' in configuration");
    }
}

inline double require_number(const Json& obj, const std::string& key, const std::string& section) {
    if (!obj.contains(key))
        throw ConfigError("missing key '" + section + "." + key + "' in configuration");
    if (!obj[key].is_number())
        throw ConfigError("key '" + section + "." + key + "' must be a number");
    return obj[key].get<double>();
}

inline double number_or(const Json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return obj[key].get<double>();
}

}  // namespace detail

inline CavityParams parse_cavity(const Json& obj) {
    detail::require_known_keys(obj, {"delta_c", "u0", "gamma0", "epsilon"}, "cavity");
    CavityParams p;
    p.delta_c = detail::require_number(obj, "delta_c", "cavity");
    p.u0 = detail::require_number(obj, "u0", "cavity");
    p.gamma0 = detail::number_or(obj, "gamma0", 0.0);
    p.epsilon = detail::require_number(obj, "epsilon", "cavity");
    validate(p);
    return p;
}

inline FeedbackCurve parse_feedback(const Json& obj) {
    detail::require_known_keys(
        obj, {"kind", "delta_i_rel", "i_sw_rel", "steepness", "i1_rel", "i2_rel"}, "feedback");
    if (!obj.contains("kind")) throw ConfigError("missing key 'feedback.kind' in configuration");
    const std::string kind = obj["kind"].get<std::string>();
    FeedbackCurve c;
    if (kind == "none") {
        c = FeedbackCurve::none();
    } else if (kind == "smooth") {
        c = FeedbackCurve::smooth(detail::require_number(obj, "delta_i_rel", "feedback"),
                                  detail::require_number(obj, "i_sw_rel", "feedback"),
                                  detail::require_number(obj, "steepness", "feedback"));
    } else if (kind == "step") {
        c = FeedbackCurve::step(detail::require_number(obj, "i1_rel", "feedback"),
                                detail::require_number(obj, "i2_rel", "feedback"),
                                detail::require_number(obj, "i_sw_rel", "feedback"));
    } else {
        throw ConfigError("feedback.kind must be one of \"smooth\", \"step\", \"none\"");
    }
    validate(c);
    return c;
}

inline PhysicalParams parse_physical(const Json& obj) {
    detail::require_known_keys(obj,
                               {"mass", "alpha_re", "alpha_im", "mode_period",
                                "mirror_transmission", "cavity_length", "mode_volume",
                                "angular_frequency", "input_intensity_mean", "input_power_mean",
                                "optical_wavelength"},
                               "physical");
    PhysicalParams p;
    p.mass = detail::require_number(obj, "mass", "physical");
    p.alpha_re = detail::number_or(obj, "alpha_re", 0.0);
    p.alpha_im = detail::number_or(obj, "alpha_im", 0.0);
    p.mode_period = detail::require_number(obj, "mode_period", "physical");
    p.mirror_transmission = detail::require_number(obj, "mirror_transmission", "physical");
    p.cavity_length = detail::require_number(obj, "cavity_length", "physical");
    p.mode_volume = detail::number_or(obj, "mode_volume", 0.0);
    p.angular_frequency = detail::number_or(obj, "angular_frequency", 0.0);
    p.input_intensity_mean = detail::number_or(obj, "input_intensity_mean", 0.0);
    p.input_power_mean = detail::number_or(obj, "input_power_mean", 0.0);
    p.optical_wavelength = detail::number_or(obj, "optical_wavelength", 0.0);
    return p;
}

inline RunConfig parse_config(const Json& doc) {
    detail::require_known_keys(doc,
                               {"description", "cavity", "feedback", "physical", "sim", "initial",
                                "ensemble", "scan", "smoothing", "feasibility"},
                               "");
    RunConfig cfg;
    cfg.raw = doc;
    if (doc.contains("description")) cfg.description = doc["description"].get<std::string>();
    if (doc.contains("cavity")) cfg.cavity = parse_cavity(doc["cavity"]);
    if (doc.contains("feedback")) cfg.curve = parse_feedback(doc["feedback"]);
    if (doc.contains("physical")) cfg.physical = parse_physical(doc["physical"]);

    if (doc.contains("sim")) {
        const Json& s = doc["sim"];
        detail::require_known_keys(s, {"dt", "t_max", "record_stride", "mode"}, "sim");
        cfg.sim.dt = detail::number_or(s, "dt", cfg.sim.dt);
        cfg.sim.t_max = detail::number_or(s, "t_max", cfg.sim.t_max);
        cfg.sim.record_stride = static_cast<int>(detail::number_or(s, "record_stride", 1));
        if (s.contains("mode")) {
            const std::string m = s["mode"].get<std::string>();
            if (m == "full") cfg.sim.mode = SimMode::Full;
            else if (m == "adiabatic") cfg.sim.mode = SimMode::Adiabatic;
            else throw ConfigError("sim.mode must be \"full\" or \"adiabatic\"");
        }
    }
    if (doc.contains("initial")) {
        const Json& s = doc["initial"];
        detail::require_known_keys(s, {"xi", "u", "field", "branch"}, "initial");
        cfg.sim.initial.xi = detail::number_or(s, "xi", 0.0);
        cfg.sim.initial.u = detail::number_or(s, "u", 0.0);
        if (s.contains("field")) {
            if (s["field"].is_string()) {
                if (s["field"].get<std::string>() != "steady")
                    throw ConfigError("initial.field must be \"steady\" or [re, im]");
            } else if (s["field"].is_array() && s["field"].size() == 2) {
                cfg.sim.initial_field = std::complex<double>(s["field"][0].get<double>(),
                                                             s["field"][1].get<double>());
            } else {
                throw ConfigError("initial.field must be \"steady\" or [re, im]");
            }
        }
        if (s.contains("branch")) {
            const std::string b = s["branch"].get<std::string>();
            if (b == "lower") cfg.sim.initial_branch = Branch::Lower;
            else if (b == "upper") cfg.sim.initial_branch = Branch::Upper;
            else throw ConfigError("initial.branch must be \"lower\" or \"upper\"");
        }
    }
    if (doc.contains("ensemble")) {
        const Json& s = doc["ensemble"];
        detail::require_known_keys(s, {"n", "seed", "sigma_u", "snapshot_stride"}, "ensemble");
        cfg.ensemble.n = static_cast<int>(detail::require_number(s, "n", "ensemble"));
        cfg.ensemble.seed = s.contains("seed") ? s["seed"].get<std::uint64_t>() : 0;
        cfg.ensemble.sigma_u = detail::number_or(s, "sigma_u", 0.0);
        cfg.ensemble.snapshot_stride =
            static_cast<int>(detail::number_or(s, "snapshot_stride", 0));
    }
    if (doc.contains("scan")) {
        const Json& s = doc["scan"];
        detail::require_known_keys(s, {"xi_min", "xi_max", "points", "initial_branch"}, "scan");
        cfg.scan.xi_min = detail::number_or(s, "xi_min", 0.0);
        cfg.scan.xi_max = detail::number_or(s, "xi_max", 1.0);
        cfg.scan.points = static_cast<int>(detail::number_or(s, "points", 4096));
        if (s.contains("initial_branch")) {
            const std::string b = s["initial_branch"].get<std::string>();
            if (b == "lower") cfg.scan.initial_branch = Branch::Lower;
            else if (b == "upper") cfg.scan.initial_branch = Branch::Upper;
            else throw ConfigError("scan.initial_branch must be \"lower\" or \"upper\"");
        }
    }
    if (doc.contains("smoothing")) {
        const Json& s = doc["smoothing"];
        detail::require_known_keys(s, {"window"}, "smoothing");
        cfg.smoothing.window = static_cast<int>(detail::number_or(s, "window", 0));
    }
    if (doc.contains("feasibility")) {
        const Json& s = doc["feasibility"];
        detail::require_known_keys(s,
                                   {"delta_i_rel", "photon_energy", "mean_power", "velocity",
                                    "potential_period", "switch_time", "ratio_threshold"},
                                   "feasibility");
        FeasibilityConfig f;
        f.delta_i_rel = detail::require_number(s, "delta_i_rel", "feasibility");
        f.photon_energy = detail::require_number(s, "photon_energy", "feasibility");
        f.mean_power = detail::require_number(s, "mean_power", "feasibility");
        f.velocity = detail::require_number(s, "velocity", "feasibility");
        f.potential_period = detail::require_number(s, "potential_period", "feasibility");
        f.switch_time = detail::require_number(s, "switch_time", "feasibility");
        f.ratio_threshold = detail::number_or(s, "ratio_threshold", 0.1);
        cfg.feasibility = f;
    }

    if (cfg.cavity) {
        cfg.sim.params = *cfg.cavity;
        cfg.ensemble.params = *cfg.cavity;
    }
    cfg.sim.curve = cfg.curve;
    cfg.ensemble.curve = cfg.curve;
    cfg.ensemble.dt = cfg.sim.dt;
    cfg.ensemble.t_max = cfg.sim.t_max;
    cfg.ensemble.record_stride = cfg.sim.record_stride;
    cfg.ensemble.mode = cfg.sim.mode;
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("configuration parse error in '" + path + "': " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("invalid configuration value: ") + e.what());
    }
}

}  // namespace bicavity
