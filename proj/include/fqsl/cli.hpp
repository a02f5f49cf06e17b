#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fqsl {

inline constexpr const char* kArtifactVersion = "fqsl 1.0.0";

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitCheckFailed = 2, kExitInconclusive = 3 };

/// Everything needed to rerun a command. The digest covers the output bytes
/// only, so the timestamp never affects it.
struct RunManifest {
    std::string command;
    nlohmann::json params = nlohmann::json::object();  // every resolved option, by long name
    std::optional<std::uint64_t> seed;
    std::string version = kArtifactVersion;
    std::string timestamp;                  // UTC, ISO 8601
    std::string output_digest;              // "sha256:<hex>"
    std::map<std::string, std::string> inputs;  // input path -> "sha256:<hex>"

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    /// Argument vector (without the command name) that reproduces the run.
    std::vector<std::string> argv() const;
};

std::string sha256_hex(std::string_view data);

struct CliResult {
    int exit_code = kExitOk;
    std::string output;
    std::string diagnostics;
    std::optional<RunManifest> manifest;
};

/// Parses and runs one command without touching stdout or stderr. Global
/// options (--threads, --out, --manifest) are accepted but not acted on here
/// except --threads.
CliResult execute(std::span<const std::string> args);

/// Full entry point: runs the command, writes the output to out (or --out),
/// and the manifest to --manifest (or as one JSON line on err).
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace fqsl
