/**
 * @file commands.hpp
 * The solve, branch, loop, eigs and verify commands. Each returns its output
 * files in memory; run_command writes them once at the end.
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nehari/config.hpp"

namespace nehari {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitVerify = 4 };

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandOutput {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;
  std::string message;  ///< one-line summary for the log
};

CommandOutput cmd_solve(const RunConfig& config);
CommandOutput cmd_branch(const RunConfig& config);
CommandOutput cmd_loop(const RunConfig& config);
CommandOutput cmd_eigs(const RunConfig& config);
CommandOutput cmd_verify(const RunConfig& config);

/// Loads the config, applies the seed override, runs `command` and writes
/// its files under `out`. Returns the process exit code.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                std::ostream& log);

}  // namespace nehari
