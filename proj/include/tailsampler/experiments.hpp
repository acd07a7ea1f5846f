#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailsampler/is_core.hpp"

namespace tailsampler {

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed; ///< overrides the config seed
  unsigned threads = 1;
  std::filesystem::path base_dir;    ///< for relative paths in the config
  std::ostream *log = nullptr;       ///< progress and diagnostics
};

/// One completed sweep point.
struct SweepRow {
  std::string model; ///< default model for pcr, empty otherwise
  double level = 0.0; ///< u, or gamma for pcr
  double u = 0.0;
  double l = 0.0;
  ISEstimate estimate;
  std::optional<ISEstimate> naive;
  std::size_t twist_failures = 0;
  std::vector<CrossvalPoint> crossval;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<SweepRow> rows;
  std::vector<std::string> failed; ///< one entry per failed sweep point
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::filesystem::path> files;
};

/// Every command validates the whole config first and throws ConfigError on
/// a schema violation. Runtime failures of single sweep points are collected
/// in `failed` and make the exit code nonzero.
CommandResult cmd_estimate(const nlohmann::json &config, const RunOptions &opt);
CommandResult cmd_network(const nlohmann::json &config, const RunOptions &opt);
CommandResult cmd_pcr(const nlohmann::json &config, const RunOptions &opt);
CommandResult cmd_selfsim(const nlohmann::json &config, const RunOptions &opt);
CommandResult cmd_rate(const nlohmann::json &config, const RunOptions &opt);
CommandResult cmd_crossval(const nlohmann::json &config, const RunOptions &opt);

/// Dispatches on the command name; throws std::invalid_argument for an
/// unknown name.
CommandResult run_command(const std::string &name, const nlohmann::json &config,
                          const RunOptions &opt);

/// Least-squares slope of log variance against log estimate over the rows
/// with positive estimate and variance; NaN with fewer than two such rows.
double log_variance_slope(const std::vector<SweepRow> &rows);

/// printf("%.17g"), the number format of every CSV.
std::string format_number(double x);

} // namespace tailsampler
