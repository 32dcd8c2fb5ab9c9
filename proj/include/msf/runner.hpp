#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "msf/config.hpp"

namespace msf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitAcceptance = 4;

/// One command-line invocation.
struct CliOptions {
  std::string command;
  std::string config_path;
  ConfigOverrides overrides;
  std::optional<std::string> resume;      ///< checkpoint file to continue from
  std::optional<std::size_t> halt_after;  ///< stop after this many new replicas (exit 3)
};

/// Names of the available subcommands.
const std::vector<std::string>& subcommands();

/**
 * Runs a subcommand, writing every output file under the configured
 * directory. Returns the process exit code: 0 success, 2 configuration
 * error, 3 numeric failure or interruption, 4 failed check.
 */
int run_cli(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace msf
