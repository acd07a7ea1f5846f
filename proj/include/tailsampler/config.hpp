#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailsampler/dependence.hpp"
#include "tailsampler/losses.hpp"
#include "tailsampler/pcr.hpp"

namespace tailsampler {

/// Schema violation; `pointer()` is the JSON pointer of the offending value.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string pointer, const std::string &message);
  const std::string &pointer() const { return pointer_; }

private:
  std::string pointer_;
};

nlohmann::json load_json_file(const std::filesystem::path &path);

/// FNV-1a 64 of the compact dump, so formatting does not change the hash.
std::uint64_t config_hash(const nlohmann::json &config);

struct ModelSpec {
  std::vector<Marginal> marginals;
  Copula copula = Copula::independence(1);

  JointModel joint() const { return JointModel(marginals, copula); }
};

/// How l is chosen at a sweep level u.
struct LPolicy {
  bool crossval = false;
  double value = 0.0;        ///< fixed l
  std::vector<double> grid;  ///< crossval candidates
  bool relative_to_log_u = false; ///< candidates are offsets c in l = c + ln u

  /// Candidates at level u, restricted to (0, u).
  std::vector<double> candidates(double u) const;
};

/// Distribution network: connectivity, relative supplies and threshold k.
struct NetworkSpec {
  Matrix A;
  std::string topology;
  Vector supply_weights; ///< sums to one; supply at level u is u * weights
  double k = 1.0;
};

/// Loss section. Distribution networks keep their topology separately since
/// the supply moves with the sweep level.
struct LossSpec {
  std::optional<LossModel> loss;
  std::optional<NetworkSpec> network;
  double rho = 1.0;
};

struct EstimateConfig {
  ModelSpec model;
  LossSpec loss;
  std::vector<double> sweep;
  std::size_t n_samples = 0;
  LPolicy l;
  std::uint64_t seed = 1;
  std::size_t naive_samples = 0; ///< 0 disables the naive baseline
  std::size_t chunk_size = 1024;
};

struct PcrConfig {
  ModelSpec model;
  LoanBook book;
  std::vector<DefaultModel> default_models;
  std::vector<double> gammas;
  std::size_t n_samples = 0;
  LPolicy l;
  std::uint64_t seed = 1;
  /// Factor level u = max(gamma, l) unless (c, eta) are given, then c m^eta.
  std::optional<double> level_c;
  double level_eta = 0.0;
  std::size_t naive_samples = 0;
  std::size_t chunk_size = 1024;
};

struct SelfsimConfig {
  ModelSpec model;
  LossSpec loss;
  double l0 = 0.0;
  double u = 0.0;
  std::size_t points = 0;
  std::size_t max_draws = 10000000;
  std::uint64_t seed = 1;
};

struct RateConfig {
  ModelSpec model;
  LossSpec loss;
  std::optional<bool> heavy; ///< unset: heavy iff some marginal is heavy-tailed
  std::size_t scan_steps = 0; ///< 0: default grid resolution
  std::vector<double> lambda_min_at{1.0, 10.0, 100.0, 1000.0, 10000.0};
};

/// Relative paths inside a config (weight files) resolve against base_dir.
EstimateConfig parse_estimate_config(const nlohmann::json &j,
                                     const std::filesystem::path &base_dir = {});
/// Same schema as estimate, but the loss must be a distribution network.
EstimateConfig parse_network_config(const nlohmann::json &j,
                                    const std::filesystem::path &base_dir = {});
/// Same schema as estimate, but l must be a crossval grid.
EstimateConfig parse_crossval_config(const nlohmann::json &j,
                                     const std::filesystem::path &base_dir = {});
PcrConfig parse_pcr_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});
SelfsimConfig parse_selfsim_config(const nlohmann::json &j,
                                   const std::filesystem::path &base_dir = {});
RateConfig parse_rate_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {});

} // namespace tailsampler
