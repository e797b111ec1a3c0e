#pragma once
// Config-driven experiment orchestration with deterministic outputs.

#include <cstdint>

#include "omap/config.hpp"

namespace omap::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct RunOptions {
    std::string out_dir = ".";
    int workers = 1;
    std::uint64_t seed = 42;
};

struct Diagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Structural validation of a config; errors name the offending keys.
Diagnostics validate(const Config& cfg);

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::string> outputs;
};

/// Runs the configured experiment and writes its CSV/JSON outputs plus
/// manifest.json under out_dir. Throws ConfigError for invalid configs and
/// std::runtime_error for numerical failures.
RunManifest run_experiment(const Config& cfg, const RunOptions& opt);

/// (name, description) of every available experiment kind.
std::vector<std::pair<std::string, std::string>> experiment_catalog();

/// Command-line entry: subcommands per experiment kind plus validate/list.
/// Exit codes: 0 success, 2 validation failure, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace omap::cli
