#pragma once

// Command-line front end. Every command reads the JSON configuration
// (defaults, then the --config file, then --set overrides, then --seed) and
// echoes the effective configuration into each file it writes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsvd/json_io.hpp"

namespace tsvd {

/// Exit statuses.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    unknown_command = 2,
    config_error = 3,
    numeric_error = 4,
};

struct CliConfig {
    /// oracles | stop | two-step | mc | lazysvd | bounds | adversary | plot
    std::string command;
    std::optional<std::filesystem::path> config_path;
    /// Defaults to $TSVD_OUTPUT_DIR, then the working directory.
    std::optional<std::filesystem::path> output_dir;
    /// "dotted.key=value", applied in order.
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    /// Worker threads for mc; 0 picks the hardware concurrency.
    std::size_t threads = 0;
};

const std::vector<std::string>& cli_commands();

/// Defaults merged with the config file, the overrides and the seed.
Json effective_config(const CliConfig& cli);

/// Runs one command. Writes a one-line JSON summary of emitted files to out
/// and, on failure, a JSON error record to err.
int run(const CliConfig& cli, std::ostream& out, std::ostream& err);

/// argv front end over run().
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tsvd
