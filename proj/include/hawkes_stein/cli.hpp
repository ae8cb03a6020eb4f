#pragma once

// Subcommand runner behind the hawkes-stein executable.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "hawkes_stein/experiment.hpp"

namespace hawkes_stein {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitModel = 3,
  kExitBudget = 4,
};

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<double> budget;
};

// Loads the config (defaults when no path is given) and applies the overrides.
ExperimentConfig resolve_config(const Overrides& o);

// command: simulate | resolvent | dw | rate | check. Writes artifacts under
// config.output_dir and returns an ExitCode.
int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log);

// resolve_config + run_command with errors mapped to exit codes.
int run_cli(const std::string& command, const Overrides& o, std::ostream& log);

}  // namespace hawkes_stein
