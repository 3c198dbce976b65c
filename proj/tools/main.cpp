#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgecache/experiment.hpp"

namespace {

bool is_preset(const std::string& name) {
  const auto names = edgecache::experiment::preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fetch/cache decision simulator for price-driven edge caching"};
  app.require_subcommand(1);

  std::string target;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int replications = 0;
  int horizon = 0;
  std::vector<std::string> override_args;

  CLI::App* run = app.add_subcommand("run", "Run a preset or a config file");
  run->add_option("target", target, "Preset name (fig2..fig7) or config path")->required();
  run->add_option("--seed", seed, "Root seed")->each([&](const std::string&) { seed_set = true; });
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--override", override_args, "Config override key=value (repeatable)");
  run->add_option("--replications", replications, "Replication count");
  run->add_option("--horizon", horizon, "Horizon in slots");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Validate a config file");
  validate->add_option("path", validate_path, "Config path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto config = edgecache::experiment::validate_config(validate_path);
      std::cout << edgecache::experiment::canonical_form(config) << "\n";
      return 0;
    }

    auto overrides = edgecache::experiment::parse_overrides(override_args);
    if (seed_set) overrides.push_back({"seed", std::to_string(seed)});
    if (replications > 0) overrides.push_back({"replications", std::to_string(replications)});
    if (horizon > 0) overrides.push_back({"horizon", std::to_string(horizon)});
    if (!out_dir.empty()) overrides.push_back({"output", "\"" + out_dir + "\""});

    edgecache::experiment::RunOutput result;
    if (is_preset(target)) {
      result = edgecache::experiment::run_preset(target, overrides);
    } else {
      auto config = edgecache::experiment::validate_config(target);
      config = edgecache::experiment::apply_overrides(config, overrides);
      result = edgecache::experiment::run_config(config);
    }
    for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
