#pragma once

#include "osgood_cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace osgood::cli {

/// Process exit codes; disjoint across commands.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitNoCertificate = 3,
  kExitBlowUp = 4,
  kExitStepFailure = 5,
  kExitValidationFailed = 6,
};

/// Command-line overrides applied on top of the config file.
struct CommandOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::optional<std::size_t> t_grid;
  std::optional<double> horizon;
  std::optional<double> threshold;
  std::optional<std::filesystem::path> verify_only;
  /// `dotted.key=v1,v2,...`; several sweeps form a product.
  std::vector<std::string> sweep;
};

/// Concurrency cap from OSGOOD_THREADS, else hardware concurrency.
unsigned thread_limit();

void apply_overrides(RunConfig& config, const CommandOptions& options);

int cmd_certify(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_criteria(const RunConfig& config, const CommandOptions& options, std::ostream& log);
int cmd_validate(const RunConfig& config, const CommandOptions& options, std::ostream& log);

/// Loads the config, expands sweeps and runs `command` (certify, simulate,
/// criteria or validate) once per sweep point, each into its own output
/// subdirectory. Input errors are reported on `err` and map to exit 1.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const CommandOptions& options, std::ostream& log, std::ostream& err);

}  // namespace osgood::cli
