#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edgecache/sim.hpp"

namespace edgecache::experiment {

/// Configuration or override problem, with a key path (and a line for parse
/// errors) baked into the message.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogConfig {
  int count = 1;
  double size_low = 1.0;
  double size_high = 1.0;
};

struct PopularityConfig {
  std::string kind = "fixed";  // fixed | uniform
  double value = 0.5;
  double low = 0.0;
  double high = 1.0;
};

struct PriceConfig {
  double mean = 1.0;
  std::optional<double> spread;  // default: 10% of the mean
  int points = 2;
};

struct BlockConfig {
  int length = 1;
  PopularityConfig popularity;
  PriceConfig store;
  PriceConfig fetch;
};

struct PolicyConfig {
  std::string kind = "optimal_stationary";
  int lookahead = 0;
  double stepsize = 0.1;
  std::string epsilon_kind = "constant";  // constant | glie_inverse_t
  double epsilon = 0.01;
  std::string bootstrap = "min_feasible";  // min_feasible | next_selected
};

struct CapacityJsonConfig {
  std::string mode = "none";  // none | instantaneous_c4 | long_term_c5 | stability_c6
  std::optional<bool> enforce_c4;  // default: mode == instantaneous_c4
  double hard = 0.0;               // required when any enforcement is active
  std::optional<double> soft;      // default: hard
  bool backhaul = false;
  double link_budget = 0.0;
  std::optional<double> zeta;  // default: 1e-3 / (mean file size * file count)
  bool post_projection_duals = false;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int horizon = 1000;
  int replications = 1;
  double discount = 0.9;
  CatalogConfig catalog;
  PopularityConfig popularity;
  PriceConfig store_prices{2.0, std::nullopt, 2};
  PriceConfig fetch_prices{44.0, std::nullopt, 2};
  std::vector<BlockConfig> blocks;  // empty: one block spanning the horizon
  PolicyConfig policy;
  CapacityJsonConfig capacity;
  std::string output = "out";
};

/// Parses and fully validates a config file. Unknown keys are rejected;
/// parse errors carry line/column, range errors carry the key path.
ExperimentConfig validate_config(const std::string& path);

/// Same validation applied to config text instead of a file.
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical JSON form of a config: every default materialized, keys
/// sorted, two-space indentation. Parsing the canonical form reproduces the
/// config.
std::string canonical_form(const ExperimentConfig& config);

/// Materialize the runnable pieces.
sim::Scenario build_scenario(const ExperimentConfig& config);
sim::PolicySpec build_policy(const ExperimentConfig& config);

/// One key=value override with a dotted key path into the canonical JSON
/// (e.g. "policy.stepsize=0.2"). The shorthands F, T, and N map to
/// catalog.count, horizon, and replications.
struct Override {
  std::string key;
  std::string value;
};

std::vector<Override> parse_overrides(const std::vector<std::string>& assignments);
ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<Override>& o);

struct RunOutput {
  std::vector<std::string> files;  // CSVs plus the sidecar manifest
};

/// Runs a validated custom config: one ensemble, one CSV of per-slot mean
/// cost and multipliers, plus the manifest.
RunOutput run_config(const ExperimentConfig& config);

/// Bundled experiment presets (fig2 .. fig7), each sweeping its own grid
/// and writing one CSV per curve family plus a manifest of the effective
/// parameters. Scale knobs (seed, horizon, replications, catalog size, ...)
/// honor overrides.
RunOutput run_preset(const std::string& name, const std::vector<Override>& overrides);

std::vector<std::string> preset_names();

}  // namespace edgecache::experiment
