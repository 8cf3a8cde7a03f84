#pragma once

// Run manifests: every data file a subcommand emits is paired with one
// manifest holding the fully resolved configuration, tool version, seed and
// output paths.  Re-running a manifest reproduces the data bit-identically.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bicavity/csvio.hpp"
#include "bicavity/version.hpp"

namespace bicavity {

struct RunManifest {
    std::string subcommand;
    nlohmann::json resolved_config;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;
};

inline nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["config"] = m.resolved_config;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["outputs"] = m.outputs;
    j["duration_seconds"] = m.duration_seconds;
    return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.resolved_config = j.at("config");
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
    write_file_atomic(path, to_json(m).dump(2) + "\n");
}

}  // namespace bicavity
