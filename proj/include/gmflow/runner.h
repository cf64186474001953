#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gmflow/config.h"

namespace gmflow {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitIo = 3 };

/// Names accepted by run(): limit, residual, converge, holder, collisions, dyson.
const std::vector<std::string>& subcommands();

struct RunOptions {
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides the environment and the config
  std::optional<std::uint64_t> seed;   // overrides sampler.seed
  unsigned threads = 0;                // 0 means the hardware concurrency
};

/// Environment variable that overrides output.directory (below --out).
inline constexpr const char* kOutDirEnv = "GMFLOW_OUT_DIR";

/// Executes one subcommand and writes its CSV files into out_dir. Returns the
/// file names written. Throws ConfigError, IoError or NumericalError.
std::vector<std::string> run(const ExperimentConfig& config, const std::string& subcommand,
                             const std::filesystem::path& out_dir, unsigned threads, std::ostream& summary);

/// Loads the config, applies overrides, runs, writes manifest.json and maps
/// failures to exit codes. Messages go to `err`, the summary to `out`.
int run_cli(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace gmflow
