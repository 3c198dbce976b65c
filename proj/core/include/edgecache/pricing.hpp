#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "edgecache/core.hpp"
#include "edgecache/env.hpp"
#include "edgecache/learning.hpp"

namespace edgecache::pricing {

/// Stochastic multiplier estimates acting as per-byte surcharges on the
/// storage and fetching prices. Both stay nonnegative at all times
/// (projection onto the nonnegative orthant after every update).
struct DualState {
  double storage_multiplier = 0.0;   // per byte, storage side
  double backhaul_multiplier = 0.0;  // per byte, back-haul side
  double stepsize = 1e-3;
};

/// Which long-term storage signal drives the storage multiplier. The two
/// storage modes are alternatives; the back-haul multiplier composes with
/// either.
enum class StorageDualMode { none, long_term, stability };

struct CapacityConfig {
  StorageDualMode storage_dual = StorageDualMode::none;
  bool enforce_hard = false;  // per-slot projection onto the hard budget
  double hard_capacity = std::numeric_limits<double>::infinity();
  double soft_capacity = std::numeric_limits<double>::infinity();
  bool backhaul_dual = false;
  double link_budget = 0.0;
  double dual_stepsize = 1e-3;
  /// Update multipliers with the executed (post-projection) actions instead
  /// of the proposed ones. Off by default.
  bool dual_update_post_projection = false;

  bool any_dual() const { return storage_dual != StorageDualMode::none || backhaul_dual; }
  void validate() const;
};

/// store_price += storage multiplier * size,
/// fetch_price += back-haul multiplier * size.
PriceSample augment_prices(const PriceSample& prices, double size, const DualState& duals);

/// Storage multiplier step against the soft budget:
/// [mu + zeta * (cached_bytes - soft_capacity)]+.
void dual_update_capacity(DualState& duals, double cached_bytes, double soft_capacity);

/// Storage multiplier step against net flow into the cache:
/// [mu + zeta * sum_f size_f * ([a_f - s_f]+ - [s_f - a_f]+)]+.
/// With zero start and unit step the multiplier equals the bytes currently
/// stored (queue reading).
void dual_update_stability(DualState& duals, std::span<const ActionPair> actions,
                           std::span<const SlotState> states, std::span<const double> sizes);

/// Back-haul multiplier step: [nu + zeta * (fetched_bytes - link_budget)]+.
void dual_update_backhaul(DualState& duals, double fetched_bytes, double link_budget);

/// Threshold decision under the stability-mode storage multiplier. Uncached
/// files see the storage price surcharged as usual; for a cached file the
/// drop branch earns the eviction credit (continuation lowered by
/// multiplier * size) while keeping carries no surcharge. Equal to the plain
/// threshold rule when the multiplier is zero.
ActionPair stability_adjusted_decide(SlotState s, const PriceSample& prices,
                                     const ValueTable& values, const DualState& duals,
                                     double size, double discount);

struct ProjectionCandidate {
  int file_id = 0;
  ActionPair proposed;
  double sort_key = 0.0;  // selection score of the chosen caching action
  double size = 0.0;
  SlotState state;
};

/// Greedy repair onto the hard capacity: proposals without a caching bit
/// pass through; caching proposals are admitted in ascending sort-key order
/// (ties by file id), skipping any that no longer fit. A rejected file
/// keeps serving its request with the minimal feasible fetch
/// (fetch = request and not cached) and loses its caching bit. Output order
/// matches input order and every output action is feasible.
std::vector<std::pair<int, ActionPair>> project_c4(
    const std::vector<ProjectionCandidate>& candidates, double hard_capacity);

struct MqSlotResult {
  std::vector<ActionPair> actions;  // executed, per file
  double plain_cost = 0.0;          // raw-price cost of the executed actions
  double augmented_cost = 0.0;      // learning cost (multiplier surcharges included)
  double cached_bytes = 0.0;        // executed caching bytes
  double fetched_bytes = 0.0;       // executed fetching bytes
};

/// One slot of the capacity-aware online learner across all files: select
/// with multiplier-augmented prices, step the duals on the proposed
/// actions, project onto the hard budget when enforced, then record the
/// executed transitions (with their augmented costs) for the per-file
/// factor updates. With zero multipliers and no projection the slot is
/// bit-identical to the plain learner. Callers feed the next slot's
/// requests through QAgent::observe_request before the next call.
MqSlotResult mq_learning_step(std::vector<learning::QAgent>& agents,
                              const std::vector<SlotState>& states,
                              const std::vector<PriceSample>& prices,
                              const std::vector<double>& sizes, DualState& duals,
                              const CapacityConfig& config, double epsilon,
                              std::vector<env::RngStream>& exploration);

}  // namespace edgecache::pricing
