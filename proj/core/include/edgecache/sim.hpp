#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgecache/core.hpp"
#include "edgecache/env.hpp"
#include "edgecache/learning.hpp"
#include "edgecache/pricing.hpp"

namespace edgecache::sim {

/// Everything a trajectory needs besides the policy: the file catalog
/// (ids and sizes), the block schedule that resolves per-file popularity
/// and price models over time, the discount, and the capacity handling.
struct Scenario {
  std::vector<env::CatalogFile> catalog;
  env::ScenarioSchedule schedule;
  double discount = 0.9;
  pricing::CapacityConfig capacity;

  void validate(int horizon) const;
};

struct PolicySpec {
  enum class Kind {
    optimal_stationary,
    finite_horizon,
    myopic,
    stochastic_value,
    q_learning,
    mq_learning,
  };

  Kind kind = Kind::optimal_stationary;
  int horizon_h = 0;                          // finite_horizon
  double stepsize = 0.1;                      // stochastic_value / q / mq
  learning::ExplorationSchedule exploration;  // q / mq
  learning::QBootstrap bootstrap = learning::QBootstrap::min_feasible;

  void validate() const;

  static PolicySpec optimal();
  static PolicySpec finite_horizon(int h);
  static PolicySpec myopic();
  static PolicySpec stochastic_value(double stepsize);
  static PolicySpec q_learning(double stepsize, learning::ExplorationSchedule eps);
  static PolicySpec mq_learning(double stepsize, learning::ExplorationSchedule eps);
};

/// Full per-slot, per-file record of one simulated trajectory. The cache
/// recursion (next slot's cached bit equals this slot's caching decision)
/// and per-state feasibility hold for every entry; validate() enforces
/// both.
struct TrajectoryRecord {
  int files = 0;
  int slots = 0;
  // Flattened [slot * files + file].
  std::vector<std::uint8_t> request, cached, fetch, cache;
  std::vector<double> store_price, fetch_price, file_cost;
  // Per slot.
  std::vector<double> slot_cost;
  std::vector<double> storage_multiplier, backhaul_multiplier;

  SlotState state_at(int slot, int file) const {
    const std::size_t i = index(slot, file);
    return {request[i] != 0, cached[i] != 0};
  }
  ActionPair action_at(int slot, int file) const {
    const std::size_t i = index(slot, file);
    return {fetch[i] != 0, cache[i] != 0};
  }
  std::size_t index(int slot, int file) const {
    return static_cast<std::size_t>(slot) * files + file;
  }

  void validate() const;
};

struct EnsembleResult {
  std::vector<double> mean_slot_cost;  // averaged across replications, per slot
  std::vector<double> mean_storage_multiplier;
  std::vector<double> mean_backhaul_multiplier;
  int replications = 0;
};

/// Zero-lookahead baseline: fetch only to serve a live request, and cache
/// whenever the fetch price exceeds the store price and the content is in
/// hand (just fetched or already cached).
ActionPair myopic_policy(SlotState s, const PriceSample& prices);

/// Simulates `horizon` slots from an all-uncached start: reveal requests
/// and prices, apply the policy (with dual pricing and hard-capacity
/// projection as configured), record costs and multipliers, advance the
/// cache states. Pure function of (scenario, policy, horizon, seed); online
/// policies carry their learning state across slots and blocks.
TrajectoryRecord run_trajectory(const Scenario& scenario, const PolicySpec& policy, int horizon,
                                std::uint64_t seed);

/// Arithmetic mean of the per-slot cost over independent replications on
/// disjoint sub-streams of `seed`.
EnsembleResult run_ensemble(const Scenario& scenario, const PolicySpec& policy, int replications,
                            int horizon, std::uint64_t seed);

/// Sum over slots of discount^slot * slot cost.
double discounted_cost(const TrajectoryRecord& record, double discount);

/// Fraction of per-file decisions with the caching bit set, optionally
/// restricted to decisions taken in a given state. Empty selection yields
/// an empty optional.
std::optional<double> caching_ratio(const TrajectoryRecord& record,
                                    std::optional<SlotState> state_filter = {});

}  // namespace edgecache::sim
