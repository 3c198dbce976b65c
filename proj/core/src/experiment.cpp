#include "edgecache/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "edgecache/planning.hpp"

namespace edgecache::experiment {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path.empty() ? message : path + ": " + message);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

PopularityConfig popularity_from_json(const json& j, const std::string& path) {
  check_keys(j, {"kind", "value", "range"}, path);
  PopularityConfig out;
  out.kind = get_or<std::string>(j, "kind", "fixed", path);
  if (out.kind == "fixed") {
    out.value = get_or<double>(j, "value", 0.5, path);
    if (out.value < 0.0 || out.value > 1.0) fail(path + ".value", "popularity out of [0,1]");
  } else if (out.kind == "uniform") {
    if (!j.contains("range")) fail(path + ".range", "missing for uniform popularity");
    const auto range = j.at("range").get<std::vector<double>>();
    if (range.size() != 2) fail(path + ".range", "expected [low, high]");
    out.low = range[0];
    out.high = range[1];
    if (out.low < 0.0 || out.high > 1.0 || out.low > out.high)
      fail(path + ".range", "popularity range out of [0,1]");
  } else {
    fail(path + ".kind", "expected fixed or uniform");
  }
  return out;
}

PriceConfig price_from_json(const json& j, const std::string& path) {
  check_keys(j, {"mean", "spread", "points"}, path);
  PriceConfig out;
  out.mean = get_or<double>(j, "mean", 1.0, path);
  if (out.mean < 0.0) fail(path + ".mean", "negative price mean");
  if (j.contains("spread")) {
    out.spread = j.at("spread").get<double>();
    if (*out.spread < 0.0) fail(path + ".spread", "negative spread");
    if (*out.spread > out.mean) fail(path + ".spread", "spread exceeds mean (negative price)");
  } else if (0.1 * out.mean > out.mean) {
    fail(path + ".mean", "default spread would be negative");
  }
  out.points = get_or<int>(j, "points", 2, path);
  if (out.points < 1) fail(path + ".points", "support needs at least one point");
  return out;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"seed", "horizon", "replications", "discount", "catalog", "popularity", "prices",
              "blocks", "policy", "capacity", "output"},
             "");
  ExperimentConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1, "");
  cfg.horizon = get_or<int>(j, "horizon", 1000, "");
  if (cfg.horizon < 1) fail("horizon", "must be >= 1");
  cfg.replications = get_or<int>(j, "replications", 1, "");
  if (cfg.replications < 1) fail("replications", "must be >= 1");
  cfg.discount = get_or<double>(j, "discount", 0.9, "");
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) fail("discount", "out of (0,1)");

  if (j.contains("catalog")) {
    const json& c = j.at("catalog");
    check_keys(c, {"count", "size_range"}, "catalog");
    cfg.catalog.count = get_or<int>(c, "count", 1, "catalog");
    if (cfg.catalog.count < 1) fail("catalog.count", "must be >= 1");
    if (c.contains("size_range")) {
      const auto range = c.at("size_range").get<std::vector<double>>();
      if (range.size() != 2) fail("catalog.size_range", "expected [low, high]");
      cfg.catalog.size_low = range[0];
      cfg.catalog.size_high = range[1];
    }
    if (!(cfg.catalog.size_low > 0.0) || cfg.catalog.size_low > cfg.catalog.size_high)
      fail("catalog.size_range", "requires 0 < low <= high");
  }

  if (j.contains("popularity"))
    cfg.popularity = popularity_from_json(j.at("popularity"), "popularity");

  if (j.contains("prices")) {
    const json& p = j.at("prices");
    check_keys(p, {"store", "fetch"}, "prices");
    if (p.contains("store")) cfg.store_prices = price_from_json(p.at("store"), "prices.store");
    if (p.contains("fetch")) cfg.fetch_prices = price_from_json(p.at("fetch"), "prices.fetch");
  }

  if (j.contains("blocks")) {
    if (!j.at("blocks").is_array()) fail("blocks", "expected an array");
    int index = 0;
    for (const json& b : j.at("blocks")) {
      const std::string path = "blocks[" + std::to_string(index++) + "]";
      check_keys(b, {"length", "popularity", "store", "fetch"}, path);
      BlockConfig block;
      block.length = get_or<int>(b, "length", 1, path);
      if (block.length < 1) fail(path + ".length", "must be >= 1");
      block.popularity = b.contains("popularity")
                             ? popularity_from_json(b.at("popularity"), path + ".popularity")
                             : cfg.popularity;
      block.store =
          b.contains("store") ? price_from_json(b.at("store"), path + ".store") : cfg.store_prices;
      block.fetch =
          b.contains("fetch") ? price_from_json(b.at("fetch"), path + ".fetch") : cfg.fetch_prices;
      cfg.blocks.push_back(block);
    }
    int total = 0;
    for (const auto& b : cfg.blocks) total += b.length;
    if (!cfg.blocks.empty() && total != cfg.horizon)
      fail("blocks", "block lengths must sum to the horizon");
  }

  if (j.contains("policy")) {
    const json& p = j.at("policy");
    check_keys(p, {"kind", "lookahead", "stepsize", "epsilon", "bootstrap"}, "policy");
    cfg.policy.kind = get_or<std::string>(p, "kind", "optimal_stationary", "policy");
    static const std::set<std::string> kinds = {"optimal_stationary", "finite_horizon", "myopic",
                                                "stochastic_value", "q_learning", "mq_learning"};
    if (!kinds.count(cfg.policy.kind)) fail("policy.kind", "unknown policy kind");
    cfg.policy.lookahead = get_or<int>(p, "lookahead", 0, "policy");
    if (cfg.policy.lookahead < 0) fail("policy.lookahead", "must be >= 0");
    cfg.policy.stepsize = get_or<double>(p, "stepsize", 0.1, "policy");
    if (!(cfg.policy.stepsize > 0.0 && cfg.policy.stepsize < 1.0))
      fail("policy.stepsize", "out of (0,1)");
    if (p.contains("epsilon")) {
      const json& e = p.at("epsilon");
      check_keys(e, {"kind", "value"}, "policy.epsilon");
      cfg.policy.epsilon_kind = get_or<std::string>(e, "kind", "constant", "policy.epsilon");
      if (cfg.policy.epsilon_kind != "constant" && cfg.policy.epsilon_kind != "glie_inverse_t")
        fail("policy.epsilon.kind", "expected constant or glie_inverse_t");
      cfg.policy.epsilon = get_or<double>(e, "value", 0.01, "policy.epsilon");
      if (cfg.policy.epsilon < 0.0 || cfg.policy.epsilon > 1.0)
        fail("policy.epsilon.value", "out of [0,1]");
    }
    cfg.policy.bootstrap = get_or<std::string>(p, "bootstrap", "min_feasible", "policy");
    if (cfg.policy.bootstrap != "min_feasible" && cfg.policy.bootstrap != "next_selected")
      fail("policy.bootstrap", "expected min_feasible or next_selected");
  }

  if (j.contains("capacity")) {
    const json& c = j.at("capacity");
    check_keys(c,
               {"mode", "enforce_c4", "hard", "soft", "backhaul", "link_budget", "zeta",
                "post_projection_duals"},
               "capacity");
    cfg.capacity.mode = get_or<std::string>(c, "mode", "none", "capacity");
    static const std::set<std::string> modes = {"none", "instantaneous_c4", "long_term_c5",
                                                "stability_c6"};
    if (!modes.count(cfg.capacity.mode)) fail("capacity.mode", "unknown capacity mode");
    if (c.contains("enforce_c4")) cfg.capacity.enforce_c4 = c.at("enforce_c4").get<bool>();
    cfg.capacity.hard = get_or<double>(c, "hard", 0.0, "capacity");
    if (c.contains("soft")) {
      cfg.capacity.soft = c.at("soft").get<double>();
      if (cfg.capacity.hard > 0.0 && *cfg.capacity.soft > cfg.capacity.hard)
        fail("capacity.soft", "soft capacity exceeds hard capacity");
    }
    cfg.capacity.backhaul = get_or<bool>(c, "backhaul", false, "capacity");
    cfg.capacity.link_budget = get_or<double>(c, "link_budget", 0.0, "capacity");
    if (cfg.capacity.backhaul && cfg.capacity.link_budget < 0.0)
      fail("capacity.link_budget", "must be >= 0");
    if (c.contains("zeta")) {
      cfg.capacity.zeta = c.at("zeta").get<double>();
      if (!(*cfg.capacity.zeta > 0.0)) fail("capacity.zeta", "must be > 0");
    }
    cfg.capacity.post_projection_duals =
        get_or<bool>(c, "post_projection_duals", false, "capacity");
    const bool needs_budget = cfg.capacity.mode != "none" ||
                              cfg.capacity.enforce_c4.value_or(false);
    if (needs_budget && !(cfg.capacity.hard > 0.0))
      fail("capacity.hard", "must be > 0 when capacity handling is active");
  }

  cfg.output = get_or<std::string>(j, "output", "out", "");
  return cfg;
}

json to_json(const PopularityConfig& p) {
  json j;
  j["kind"] = p.kind;
  if (p.kind == "fixed")
    j["value"] = p.value;
  else
    j["range"] = {p.low, p.high};
  return j;
}

json to_json(const PriceConfig& p) {
  json j;
  j["mean"] = p.mean;
  j["spread"] = p.spread ? *p.spread : 0.1 * p.mean;
  j["points"] = p.points;
  return j;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["horizon"] = cfg.horizon;
  j["replications"] = cfg.replications;
  j["discount"] = cfg.discount;
  j["catalog"] = {{"count", cfg.catalog.count},
                  {"size_range", {cfg.catalog.size_low, cfg.catalog.size_high}}};
  j["popularity"] = to_json(cfg.popularity);
  j["prices"] = {{"store", to_json(cfg.store_prices)}, {"fetch", to_json(cfg.fetch_prices)}};
  if (!cfg.blocks.empty()) {
    json blocks = json::array();
    for (const auto& b : cfg.blocks) {
      blocks.push_back({{"length", b.length},
                        {"popularity", to_json(b.popularity)},
                        {"store", to_json(b.store)},
                        {"fetch", to_json(b.fetch)}});
    }
    j["blocks"] = blocks;
  }
  j["policy"] = {{"kind", cfg.policy.kind},
                 {"lookahead", cfg.policy.lookahead},
                 {"stepsize", cfg.policy.stepsize},
                 {"epsilon", {{"kind", cfg.policy.epsilon_kind}, {"value", cfg.policy.epsilon}}},
                 {"bootstrap", cfg.policy.bootstrap}};
  json capacity;
  capacity["mode"] = cfg.capacity.mode;
  capacity["enforce_c4"] =
      cfg.capacity.enforce_c4.value_or(cfg.capacity.mode == "instantaneous_c4");
  capacity["hard"] = cfg.capacity.hard;
  capacity["soft"] = cfg.capacity.soft ? *cfg.capacity.soft : cfg.capacity.hard;
  capacity["backhaul"] = cfg.capacity.backhaul;
  capacity["link_budget"] = cfg.capacity.link_budget;
  if (cfg.capacity.zeta) capacity["zeta"] = *cfg.capacity.zeta;
  capacity["post_projection_duals"] = cfg.capacity.post_projection_duals;
  j["capacity"] = capacity;
  j["output"] = cfg.output;
  return j;
}

env::PopularitySpec popularity_spec(const PopularityConfig& p) {
  env::PopularitySpec spec;
  if (p.kind == "fixed") {
    spec.kind = env::PopularitySpec::Kind::fixed;
    spec.value = p.value;
  } else {
    spec.kind = env::PopularitySpec::Kind::uniform;
    spec.low = p.low;
    spec.high = p.high;
  }
  return spec;
}

env::PriceSpec price_spec(const PriceConfig& p) {
  env::PriceSpec spec;
  spec.mean = p.mean;
  spec.spread = p.spread;
  spec.points = p.points;
  return spec;
}

// ---------------------------------------------------------------------------
// Output plumbing.
// ---------------------------------------------------------------------------

std::string format_value(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", v);
  return buffer;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_value(cells[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::filesystem::path ensure_output_dir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.output);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_manifest(const ExperimentConfig& cfg, const std::string& name,
                           const json& extras) {
  const auto dir = ensure_output_dir(cfg);
  json manifest;
  manifest["preset"] = name;
  manifest["config"] = json::parse(canonical_form(cfg));
  manifest["details"] = extras;
  const auto path = dir / (name + "_manifest.json");
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
  return path.string();
}

double mean_over(const std::vector<double>& values, int from) {
  if (from >= static_cast<int>(values.size())) return 0.0;
  double total = 0.0;
  for (std::size_t t = from; t < values.size(); ++t) total += values[t];
  return total / (values.size() - from);
}

// Stationary single-file scenario helper used by the sweep presets.
sim::Scenario point_scenario(const ExperimentConfig& base, double popularity, double store_mean,
                             double fetch_mean, int horizon) {
  ExperimentConfig cfg = base;
  cfg.horizon = horizon;
  cfg.popularity = {"fixed", popularity, 0.0, 1.0};
  cfg.store_prices.mean = store_mean;
  cfg.fetch_prices.mean = fetch_mean;
  cfg.blocks.clear();
  return build_scenario(cfg);
}

// Probability that a store-price draw stays within the marginal saving of
// the converged table, i.e. the chance a cached, requested file is kept.
double exact_keep_probability(const planning::FileModel& model) {
  const ValueTable values = planning::value_iteration(model, 1e-10);
  const double saving = model.discount * (values.uncached - values.cached);
  double prob = 0.0;
  for (const auto& atom : model.store_prices.support())
    if (atom.value <= saving) prob += atom.probability;
  return prob;
}

RunOutput preset_fig2(const ExperimentConfig& base);
RunOutput preset_fig3(const ExperimentConfig& base);
RunOutput preset_fig4(const ExperimentConfig& base);
RunOutput preset_fig5(const ExperimentConfig& base);
RunOutput preset_fig6(const ExperimentConfig& base);
RunOutput preset_fig7(const ExperimentConfig& base);

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column anchor.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string canonical_form(const ExperimentConfig& config) {
  return to_json(config).dump(2);
}

sim::Scenario build_scenario(const ExperimentConfig& config) {
  sim::Scenario scenario;
  scenario.discount = config.discount;
  scenario.catalog = env::build_catalog(
      config.catalog.count, {config.catalog.size_low, config.catalog.size_high}, config.seed);

  if (config.blocks.empty()) {
    env::BlockSpec block;
    block.length = config.horizon;
    block.popularity = popularity_spec(config.popularity);
    block.store = price_spec(config.store_prices);
    block.fetch = price_spec(config.fetch_prices);
    scenario.schedule.blocks = {block};
  } else {
    for (const auto& b : config.blocks) {
      env::BlockSpec block;
      block.length = b.length;
      block.popularity = popularity_spec(b.popularity);
      block.store = price_spec(b.store);
      block.fetch = price_spec(b.fetch);
      scenario.schedule.blocks.push_back(block);
    }
  }

  auto& capacity = scenario.capacity;
  if (config.capacity.mode == "long_term_c5")
    capacity.storage_dual = pricing::StorageDualMode::long_term;
  else if (config.capacity.mode == "stability_c6")
    capacity.storage_dual = pricing::StorageDualMode::stability;
  capacity.enforce_hard =
      config.capacity.enforce_c4.value_or(config.capacity.mode == "instantaneous_c4");
  if (config.capacity.hard > 0.0) capacity.hard_capacity = config.capacity.hard;
  capacity.soft_capacity = config.capacity.soft.value_or(
      config.capacity.hard > 0.0 ? config.capacity.hard
                                 : std::numeric_limits<double>::infinity());
  capacity.backhaul_dual = config.capacity.backhaul;
  capacity.link_budget = config.capacity.link_budget;
  capacity.dual_update_post_projection = config.capacity.post_projection_duals;
  if (config.capacity.zeta) {
    capacity.dual_stepsize = *config.capacity.zeta;
  } else {
    // Default step: 1e-3 scaled down by the catalog's byte volume.
    double mean_size = 0.0;
    for (const auto& f : scenario.catalog) mean_size += f.size;
    mean_size /= static_cast<double>(scenario.catalog.size());
    capacity.dual_stepsize = 1e-3 / (mean_size * static_cast<double>(scenario.catalog.size()));
  }
  return scenario;
}

sim::PolicySpec build_policy(const ExperimentConfig& config) {
  const auto& p = config.policy;
  learning::ExplorationSchedule eps;
  eps.kind = p.epsilon_kind == "constant" ? learning::ExplorationSchedule::Kind::constant
                                          : learning::ExplorationSchedule::Kind::glie_inverse_t;
  eps.epsilon = p.epsilon;
  sim::PolicySpec spec;
  if (p.kind == "optimal_stationary") {
    spec = sim::PolicySpec::optimal();
  } else if (p.kind == "finite_horizon") {
    spec = sim::PolicySpec::finite_horizon(p.lookahead);
  } else if (p.kind == "myopic") {
    spec = sim::PolicySpec::myopic();
  } else if (p.kind == "stochastic_value") {
    spec = sim::PolicySpec::stochastic_value(p.stepsize);
  } else if (p.kind == "q_learning") {
    spec = sim::PolicySpec::q_learning(p.stepsize, eps);
  } else {
    spec = sim::PolicySpec::mq_learning(p.stepsize, eps);
  }
  spec.bootstrap = p.bootstrap == "min_feasible" ? learning::QBootstrap::min_feasible
                                                 : learning::QBootstrap::next_selected;
  return spec;
}

std::vector<Override> parse_overrides(const std::vector<std::string>& assignments) {
  std::vector<Override> out;
  for (const std::string& text : assignments) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key=value: " + text);
    out.push_back({text.substr(0, eq), text.substr(eq + 1)});
  }
  return out;
}

ExperimentConfig apply_overrides(const ExperimentConfig& base, const std::vector<Override>& o) {
  json j = to_json(base);
  for (const Override& item : o) {
    std::string key = item.key;
    if (key == "F") key = "catalog.count";
    if (key == "T") key = "horizon";
    if (key == "N") key = "replications";

    // Parse the value as JSON when possible, else keep the raw string.
    json value;
    try {
      value = json::parse(item.value);
    } catch (const json::parse_error&) {
      value = item.value;
    }

    json* node = &j;
    std::stringstream path(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("empty override key");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
  }
  return config_from_json(j);
}

RunOutput run_config(const ExperimentConfig& config) {
  const sim::Scenario scenario = build_scenario(config);
  const sim::PolicySpec policy = build_policy(config);
  const sim::EnsembleResult result =
      sim::run_ensemble(scenario, policy, config.replications, config.horizon, config.seed);

  const auto dir = ensure_output_dir(config);
  const auto csv_path = dir / "run.csv";
  CsvWriter csv(csv_path,
                {"slot", "mean_cost", "storage_multiplier", "backhaul_multiplier"});
  for (int t = 0; t < config.horizon; ++t) {
    csv.row({static_cast<double>(t), result.mean_slot_cost[t],
             result.mean_storage_multiplier[t], result.mean_backhaul_multiplier[t]});
  }
  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(config, "run", json::object()));
  return out;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
}

RunOutput run_preset(const std::string& name, const std::vector<Override>& overrides) {
  ExperimentConfig base;
  base.output = "out";
  if (name == "fig2") {
    base.horizon = 400;
    base.replications = 48;
    base = apply_overrides(base, overrides);
    return preset_fig2(base);
  }
  if (name == "fig3") {
    base.horizon = 400;
    base.replications = 48;
    base = apply_overrides(base, overrides);
    return preset_fig3(base);
  }
  if (name == "fig4") {
    base.horizon = 3000;
    base.replications = 1;
    base = apply_overrides(base, overrides);
    return preset_fig4(base);
  }
  if (name == "fig5") {
    base.horizon = 400;
    base.replications = 48;
    base = apply_overrides(base, overrides);
    return preset_fig5(base);
  }
  if (name == "fig6") {
    base.horizon = 6000;
    base.replications = 8;
    base.policy.kind = "q_learning";
    base.policy.stepsize = 0.1;
    base.policy.epsilon = 0.01;
    base = apply_overrides(base, overrides);
    return preset_fig6(base);
  }
  if (name == "fig7") {
    base.horizon = 600;
    base.replications = 100;
    base.catalog.count = 50;
    base.catalog.size_low = 1.0;
    base.catalog.size_high = 100.0;
    base.policy.kind = "mq_learning";
    base.policy.stepsize = 0.3;
    base.policy.epsilon = 0.01;
    base.capacity.mode = "long_term_c5";
    base.capacity.enforce_c4 = true;
    base.capacity.hard = 1.0;  // replaced by the 40% aggregate-size budget below
    base = apply_overrides(base, overrides);
    return preset_fig7(base);
  }
  throw ConfigError("unknown preset: " + name);
}

namespace {

RunOutput preset_fig2(const ExperimentConfig& base) {
  const std::vector<double> popularity = {0.3, 0.5};
  const std::vector<double> fetch_means = {43, 45, 50, 58};
  std::vector<double> store_means;
  for (double r = 1.0; r <= 67.0; r += 6.0) store_means.push_back(r);

  const auto dir = ensure_output_dir(base);
  const auto csv_path = dir / "fig2_cost_vs_store_price.csv";
  CsvWriter csv(csv_path, {"rho_bar", "lambda_bar", "p", "avg_cost"});
  const int burn = std::min(50, base.horizon / 5);
  const sim::PolicySpec policy = sim::PolicySpec::optimal();
  for (double p : popularity) {
    for (double fetch : fetch_means) {
      for (double store : store_means) {
        const auto scenario = point_scenario(base, p, store, fetch, base.horizon);
        const auto result =
            sim::run_ensemble(scenario, policy, base.replications, base.horizon, base.seed);
        csv.row({store, fetch, p, mean_over(result.mean_slot_cost, burn)});
      }
    }
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(
      base, "fig2",
      {{"policy", "optimal_stationary"},
       {"grid", {{"p", popularity}, {"lambda_bar", fetch_means}, {"rho_bar", store_means}}},
       {"burn_in_slots", burn},
       {"columns", "avg_cost = per-slot cost averaged over post-burn-in slots and replications"}}));
  return out;
}

RunOutput preset_fig3(const ExperimentConfig& base) {
  std::vector<double> popularity;
  for (double p = 0.05; p <= 0.951; p += 0.10) popularity.push_back(p);
  const std::vector<std::pair<double, double>> price_pairs = {
      {5, 44}, {25, 44}, {45, 44}, {15, 29}};

  const auto dir = ensure_output_dir(base);
  const auto csv_path = dir / "fig3_cost_vs_popularity.csv";
  CsvWriter csv(csv_path, {"p", "rho_bar", "lambda_bar", "avg_cost"});
  const int burn = std::min(50, base.horizon / 5);
  const sim::PolicySpec policy = sim::PolicySpec::optimal();
  for (const auto& [store, fetch] : price_pairs) {
    for (double p : popularity) {
      const auto scenario = point_scenario(base, p, store, fetch, base.horizon);
      const auto result =
          sim::run_ensemble(scenario, policy, base.replications, base.horizon, base.seed);
      csv.row({p, store, fetch, mean_over(result.mean_slot_cost, burn)});
    }
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(base, "fig3",
                                     {{"policy", "optimal_stationary"},
                                      {"grid", {{"p", popularity}}},
                                      {"burn_in_slots", burn}}));
  return out;
}

RunOutput preset_fig4(const ExperimentConfig& base) {
  std::vector<double> store_means, fetch_means;
  for (double r = 1.0; r <= 56.0; r += 5.0) store_means.push_back(r);
  for (double l = 5.0; l <= 55.0; l += 10.0) fetch_means.push_back(l);
  const double p = 0.5;

  const auto dir = ensure_output_dir(base);
  const auto csv_path = dir / "fig4_caching_ratio.csv";
  CsvWriter csv(csv_path,
                {"rho_bar", "lambda_bar", "ratio_exact", "ratio_empirical", "conditioned_slots"});
  const SlotState conditioned{true, true};
  const sim::PolicySpec policy = sim::PolicySpec::optimal();
  for (double fetch : fetch_means) {
    for (double store : store_means) {
      const auto scenario = point_scenario(base, p, store, fetch, base.horizon);
      const planning::FileModel model(p, scenario.schedule.blocks[0].store.build(),
                                      scenario.schedule.blocks[0].fetch.build(), base.discount);
      const double exact = exact_keep_probability(model);
      const auto record = sim::run_trajectory(scenario, policy, base.horizon, base.seed);
      const auto empirical = sim::caching_ratio(record, conditioned);
      std::size_t conditioned_slots = 0;
      for (int t = 0; t < record.slots; ++t)
        for (int f = 0; f < record.files; ++f)
          if (record.state_at(t, f) == conditioned) ++conditioned_slots;
      csv.row({store, fetch, exact,
               empirical ? *empirical : std::numeric_limits<double>::quiet_NaN(),
               static_cast<double>(conditioned_slots)});
    }
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(
      base, "fig4",
      {{"policy", "optimal_stationary"},
       {"conditioning", "request = 1 and cached = 1"},
       {"columns",
        "ratio_exact = keep probability over the price support at the converged table; "
        "ratio_empirical = trajectory caching ratio on conditioned slots (nan when the "
        "state never occurs)"}}));
  return out;
}

RunOutput preset_fig5(const ExperimentConfig& base) {
  const double fetch = 53.0;
  std::vector<double> store_means;
  for (double r = 1.0; r <= 61.0; r += 4.0) store_means.push_back(r);
  const std::vector<double> popularity = {0.3, 0.5};
  const std::vector<double> discounts = {0.5, 0.9};

  const auto dir = ensure_output_dir(base);
  const auto csv_path = dir / "fig5_dp_vs_myopic.csv";
  CsvWriter csv(csv_path, {"rho_bar", "p", "gamma", "cost_dp", "cost_myopic"});
  const int burn = std::min(50, base.horizon / 5);
  for (double gamma : discounts) {
    for (double p : popularity) {
      for (double store : store_means) {
        ExperimentConfig cfg = base;
        cfg.discount = gamma;
        const auto scenario = point_scenario(cfg, p, store, fetch, base.horizon);
        const auto dp = sim::run_ensemble(scenario, sim::PolicySpec::optimal(),
                                          base.replications, base.horizon, base.seed);
        const auto myopic = sim::run_ensemble(scenario, sim::PolicySpec::myopic(),
                                              base.replications, base.horizon, base.seed);
        csv.row({store, p, gamma, mean_over(dp.mean_slot_cost, burn),
                 mean_over(myopic.mean_slot_cost, burn)});
      }
    }
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(base, "fig5",
                                     {{"lambda_bar", fetch},
                                      {"burn_in_slots", burn},
                                      {"pairing", "both policies share replication streams"}}));
  return out;
}

RunOutput preset_fig6(const ExperimentConfig& base) {
  const std::vector<double> fetch_means = {29, 36, 44};
  const std::vector<double> popularity = {0.3, 0.5};
  std::vector<double> store_means;
  for (double r = 1.0; r <= 28.0; r += 3.0) store_means.push_back(r);

  const auto dir = ensure_output_dir(base);
  const auto csv_path = dir / "fig6_planner_vs_learner.csv";
  CsvWriter csv(csv_path, {"rho_bar", "lambda_bar", "p", "cost_value_iteration", "cost_q_learning"});
  const int settle = std::min(1000, base.horizon / 2);
  learning::ExplorationSchedule eps{learning::ExplorationSchedule::Kind::constant,
                                    base.policy.epsilon};
  const sim::PolicySpec learner = sim::PolicySpec::q_learning(base.policy.stepsize, eps);
  for (double p : popularity) {
    for (double fetch : fetch_means) {
      for (double store : store_means) {
        const auto scenario = point_scenario(base, p, store, fetch, base.horizon);
        const auto planner = sim::run_ensemble(scenario, sim::PolicySpec::optimal(),
                                               base.replications, base.horizon, base.seed);
        const auto learned =
            sim::run_ensemble(scenario, learner, base.replications, base.horizon, base.seed);
        csv.row({store, fetch, p, mean_over(planner.mean_slot_cost, settle),
                 mean_over(learned.mean_slot_cost, settle)});
      }
    }
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(
      base, "fig6",
      {{"settle_slots", settle},
       {"columns", "costs averaged over slots after the settle window"},
       {"learner", {{"stepsize", base.policy.stepsize}, {"epsilon", base.policy.epsilon}}}}));
  return out;
}

RunOutput preset_fig7(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  // Three equal blocks; per-file popularity drawn around the block mean.
  const std::vector<std::array<double, 3>> block_params = {
      {0.23, 44.0, 2.0}, {0.37, 40.0, 5.0}, {0.01, 38.0, 2.0}};
  cfg.blocks.clear();
  const int block_length = cfg.horizon / 3;
  for (std::size_t b = 0; b < block_params.size(); ++b) {
    BlockConfig block;
    block.length = (b + 1 < block_params.size())
                       ? block_length
                       : cfg.horizon - 2 * block_length;
    const double mean_p = block_params[b][0];
    block.popularity = {"uniform", mean_p, 0.25 * mean_p, std::min(1.0, 1.75 * mean_p)};
    block.fetch = {block_params[b][1], std::nullopt, 2};
    block.store = {block_params[b][2], std::nullopt, 2};
    cfg.blocks.push_back(block);
  }

  // Hard budget: 40% of the aggregate catalog size.
  const auto catalog = env::build_catalog(
      cfg.catalog.count, {cfg.catalog.size_low, cfg.catalog.size_high}, cfg.seed);
  double aggregate = 0.0;
  for (const auto& f : catalog) aggregate += f.size;
  cfg.capacity.hard = 0.4 * aggregate;
  cfg.capacity.soft = cfg.capacity.hard;

  const sim::Scenario scenario = build_scenario(cfg);
  learning::ExplorationSchedule eps{learning::ExplorationSchedule::Kind::constant,
                                    cfg.policy.epsilon};
  const auto mq = sim::run_ensemble(scenario, sim::PolicySpec::mq_learning(cfg.policy.stepsize, eps),
                                    cfg.replications, cfg.horizon, cfg.seed);
  const auto myopic = sim::run_ensemble(scenario, sim::PolicySpec::myopic(), cfg.replications,
                                        cfg.horizon, cfg.seed);
  const auto optimal = sim::run_ensemble(scenario, sim::PolicySpec::optimal(), cfg.replications,
                                         cfg.horizon, cfg.seed);

  // Popularity of file 0 in replication 0, per slot, from the same
  // derivation the runner uses.
  std::vector<double> sample_popularity(cfg.horizon);
  const std::uint64_t rep0 = env::derive_seed(cfg.seed, env::kStreamReplication, 0);
  for (int t = 0; t < cfg.horizon; ++t) {
    const int b = scenario.schedule.block_at(t);
    env::RngStream pop_stream(env::derive_seed(rep0, env::kStreamPopularity, b, 0));
    sample_popularity[t] = scenario.schedule.blocks[b].popularity.resolve(pop_stream);
  }

  const auto dir = ensure_output_dir(cfg);
  const auto csv_path = dir / "fig7_nonstationary.csv";
  CsvWriter csv(csv_path, {"slot", "cost_mq", "cost_myopic", "cost_optimal",
                           "storage_multiplier", "sample_popularity"});
  for (int t = 0; t < cfg.horizon; ++t) {
    csv.row({static_cast<double>(t), mq.mean_slot_cost[t], myopic.mean_slot_cost[t],
             optimal.mean_slot_cost[t], mq.mean_storage_multiplier[t], sample_popularity[t]});
  }

  RunOutput out;
  out.files.push_back(csv_path.string());
  out.files.push_back(write_manifest(
      cfg, "fig7",
      {{"blocks", "popularity mean / fetch mean / store mean per block: 0.23/44/2, "
                  "0.37/40/5, 0.01/38/2; per-file popularity uniform on [0.25, 1.75] x mean"},
       {"capacity", "hard budget = 40% of aggregate catalog size, soft budget equal"},
       {"aggregate_size", aggregate},
       {"policies", "mq_learning vs myopic vs optimal_stationary, shared streams"}}));
  return out;
}

}  // namespace

}  // namespace edgecache::experiment
