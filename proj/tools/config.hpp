#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bms/bayes.hpp"
#include "bms/model.hpp"
#include "bms/relativity.hpp"

namespace bms::cli {

/// Raised for anything wrong with the configuration itself (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RuleSpec {
  BmsRule rule;
  /// Frequency-only rules may ask for the frequency family instead of the dependent one.
  RelativityFamily family = RelativityFamily::Dependent;
};

struct SimulationSettings {
  long paths = 1'000'000;
  int burn_in = 100;
  std::uint64_t seed = 20240601;
  int threads = 1;
};

struct BayesSettings {
  HypotheticalModel model;
  ClaimHistory history;
  int mse_years = 0;
  long mse_paths = 0;
};

struct RunConfig {
  std::string name = "run";
  ModelSpec model;
  int z = 9;
  int initial_level = 0;
  std::vector<RuleSpec> rules;
  std::vector<double> thresholds;
  /// Set when the thresholds were given as marginal severity quantiles.
  std::vector<double> quantiles;
  int quadrature_nodes = kDefaultNodes;
  SimulationSettings simulation;
  std::optional<BayesSettings> bayes;
  /// verify: add `perturb_delta` to r(perturb_level) before comparing (negative control).
  std::optional<int> perturb_level;
  double perturb_delta = 0.0;
  std::string format = "csv";
  std::optional<int> precision;
};

/// Preset identifiers shipped with the tool.
std::vector<std::string> preset_ids();

/// The JSON document of a preset. Throws ConfigError for unknown ids.
nlohmann::json preset_json(const std::string& id);

/// Parses and validates a configuration document.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads a file, applies it as a merge patch over the preset (if any), and parses.
RunConfig load_config(const std::optional<std::string>& path, const std::optional<std::string>& preset);

/// Thresholds for split rules; quantiles are resolved through the severity marginal.
std::vector<double> resolve_thresholds(RunConfig& cfg);

}  // namespace bms::cli
