#pragma once

#include "sentinel/clock.hpp"
#include "sentinel/config.hpp"
#include "sentinel/forge.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sentinel::cli {

enum ExitCode : int {
    kOk = 0,
    kFindings = 1, // scan --gate found On-hold SATD; scenario expectation failed
    kUsage = 2,
    kRuntime = 3,
};

/// Everything a command touches outside the process, so tests can
/// substitute streams, environment and the forge.
struct Environment {
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    std::function<std::optional<std::string>(const std::string&)> getenv;
    /// Builds the network forge client; only called by commands that need one.
    std::function<std::unique_ptr<Forge>(const ServiceConfig&, const std::string& token, Clock&)> make_forge;
    std::filesystem::path executable_dir;

    static Environment process(std::filesystem::path executable_dir);
};

int run(const std::vector<std::string>& args, Environment& env);

/// Model lookup order: explicit path, config, $SATD_SENTINEL_MODEL, then the
/// model installed next to the executable.
std::optional<std::filesystem::path> resolve_model_path(const std::optional<std::string>& explicit_path,
                                                        const ServiceConfig* config, const Environment& env);

} // namespace sentinel::cli
