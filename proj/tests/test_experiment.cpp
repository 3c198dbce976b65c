#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgecache/experiment.hpp"

using namespace edgecache;
using namespace edgecache::experiment;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "edgecache_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("config validation rejects bad values with key paths") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"discount": 1.2})"),
                       doctest::Contains("discount"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"unknown_knob": 3})"),
                       doctest::Contains("unknown_knob"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"capacity": {"mode": "long_term_c5", "hard": 10.0, "soft": 20.0}})"),
      doctest::Contains("capacity.soft"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"policy": {"kind": "nonsense"}})"),
                       doctest::Contains("policy.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"popularity": {"kind": "fixed", "value": 2.0}})"),
                       doctest::Contains("popularity"), ConfigError);
}

TEST_CASE("parse errors carry a line anchor") {
  const std::string broken = "{\n  \"seed\": 1,\n  \"horizon\": oops\n}";
  CHECK_THROWS_WITH_AS(parse_config_text(broken), doctest::Contains("line 3"), ConfigError);
}

TEST_CASE("canonical form round-trips") {
  const ExperimentConfig config = parse_config_text(R"({
    "seed": 9,
    "horizon": 120,
    "replications": 2,
    "discount": 0.8,
    "catalog": {"count": 3, "size_range": [1.0, 10.0]},
    "popularity": {"kind": "uniform", "range": [0.1, 0.6]},
    "prices": {"store": {"mean": 2.0}, "fetch": {"mean": 40.0, "spread": 2.0}},
    "policy": {"kind": "q_learning", "stepsize": 0.25,
               "epsilon": {"kind": "constant", "value": 0.02}},
    "output": "out"
  })");
  const std::string canonical = canonical_form(config);
  const ExperimentConfig reparsed = parse_config_text(canonical);
  CHECK(canonical_form(reparsed) == canonical);
  // Defaults are materialized.
  CHECK(canonical.find("\"spread\"") != std::string::npos);
  CHECK(canonical.find("\"bootstrap\"") != std::string::npos);
}

TEST_CASE("overrides patch dotted keys and shorthands") {
  ExperimentConfig base;
  const auto patched = apply_overrides(
      base, {{"F", "4"}, {"T", "50"}, {"N", "3"}, {"policy.stepsize", "0.4"}});
  CHECK(patched.catalog.count == 4);
  CHECK(patched.horizon == 50);
  CHECK(patched.replications == 3);
  CHECK(patched.policy.stepsize == doctest::Approx(0.4));

  CHECK_THROWS_AS(apply_overrides(base, {{"discount", "1.5"}}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(base, {{"no.such.key", "1"}}), ConfigError);
}

TEST_CASE("custom config run writes csv and manifest") {
  ExperimentConfig config = parse_config_text(R"({
    "seed": 4, "horizon": 40, "replications": 2, "discount": 0.9,
    "popularity": {"kind": "fixed", "value": 0.5},
    "prices": {"store": {"mean": 2.0}, "fetch": {"mean": 30.0}},
    "policy": {"kind": "optimal_stationary"}
  })");
  config.output = temp_dir("custom_run");
  const RunOutput out = run_config(config);
  REQUIRE(out.files.size() == 2);
  const std::string csv = slurp(out.files[0]);
  CHECK(csv.rfind("slot,mean_cost,storage_multiplier,backhaul_multiplier", 0) == 0);
  // One header plus one row per slot.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  CHECK(slurp(out.files[1]).find("\"config\"") != std::string::npos);
}

TEST_CASE("tiny preset smoke runs complete quickly") {
  for (const std::string name : preset_names()) {
    std::vector<Override> overrides = {{"F", "2"}, {"T", "30"}, {"N", "1"},
                                       {"output", "\"" + temp_dir("smoke_" + name) + "\""}};
    if (name == "fig4" || name == "fig6") overrides.push_back({"seed", "3"});
    const RunOutput out = run_preset(name, overrides);
    CHECK(out.files.size() >= 2);
    for (const auto& file : out.files) CHECK(std::filesystem::exists(file));
  }
  CHECK_THROWS_AS(run_preset("fig9", {}), ConfigError);
}

TEST_CASE("preset output is byte-reproducible under a fixed seed") {
  const std::string dir_a = temp_dir("repro_a");
  const std::string dir_b = temp_dir("repro_b");
  const std::vector<Override> base = {{"F", "2"}, {"T", "40"}, {"N", "2"}, {"seed", "99"}};
  auto with_out = [&](const std::string& dir) {
    std::vector<Override> o = base;
    o.push_back({"output", "\"" + dir + "\""});
    return o;
  };
  const RunOutput a = run_preset("fig7", with_out(dir_a));
  const RunOutput b = run_preset("fig7", with_out(dir_b));
  REQUIRE(a.files.size() == b.files.size());
  CHECK(slurp(a.files[0]) == slurp(b.files[0]));
}

TEST_CASE("scenario construction honors capacity defaults") {
  ExperimentConfig config = parse_config_text(R"({
    "horizon": 10,
    "catalog": {"count": 4, "size_range": [2.0, 2.0]},
    "capacity": {"mode": "long_term_c5", "hard": 5.0}
  })");
  const sim::Scenario scenario = build_scenario(config);
  CHECK(scenario.capacity.storage_dual == pricing::StorageDualMode::long_term);
  CHECK(scenario.capacity.soft_capacity == doctest::Approx(5.0));
  CHECK(!scenario.capacity.enforce_hard);
  // Default dual step scales with catalog volume: 1e-3 / (mean size * count).
  CHECK(scenario.capacity.dual_stepsize == doctest::Approx(1e-3 / 8.0));
}
