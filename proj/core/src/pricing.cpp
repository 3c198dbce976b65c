#include "edgecache/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace edgecache::pricing {

void CapacityConfig::validate() const {
  if (enforce_hard && !(hard_capacity > 0.0))
    throw std::invalid_argument("capacity: hard capacity must be > 0");
  if (std::isfinite(soft_capacity) && std::isfinite(hard_capacity) &&
      soft_capacity > hard_capacity)
    throw std::invalid_argument("capacity: soft capacity exceeds hard capacity");
  if (!(dual_stepsize > 0.0)) throw std::invalid_argument("capacity: dual stepsize must be > 0");
  if (backhaul_dual && link_budget < 0.0)
    throw std::invalid_argument("capacity: negative link budget");
}

PriceSample augment_prices(const PriceSample& prices, double size, const DualState& duals) {
  return {prices.store_price + duals.storage_multiplier * size,
          prices.fetch_price + duals.backhaul_multiplier * size};
}

void dual_update_capacity(DualState& duals, double cached_bytes, double soft_capacity) {
  duals.storage_multiplier = std::max(
      0.0, duals.storage_multiplier + duals.stepsize * (cached_bytes - soft_capacity));
}

void dual_update_stability(DualState& duals, std::span<const ActionPair> actions,
                           std::span<const SlotState> states, std::span<const double> sizes) {
  if (actions.size() != states.size() || actions.size() != sizes.size())
    throw std::invalid_argument("dual_update_stability: misaligned file lists");
  double net_flow = 0.0;
  for (std::size_t f = 0; f < actions.size(); ++f) {
    const double in = (actions[f].cache && !states[f].cached) ? 1.0 : 0.0;
    const double out = (!actions[f].cache && states[f].cached) ? 1.0 : 0.0;
    net_flow += sizes[f] * (in - out);
  }
  duals.storage_multiplier =
      std::max(0.0, duals.storage_multiplier + duals.stepsize * net_flow);
}

void dual_update_backhaul(DualState& duals, double fetched_bytes, double link_budget) {
  duals.backhaul_multiplier = std::max(
      0.0, duals.backhaul_multiplier + duals.stepsize * (fetched_bytes - link_budget));
}

ActionPair stability_adjusted_decide(SlotState s, const PriceSample& prices,
                                     const ValueTable& values, const DualState& duals,
                                     double size, double discount) {
  if (!s.cached) {
    const PriceSample surcharged{prices.store_price + duals.storage_multiplier * size,
                                 prices.fetch_price};
    return bellman_decide(s, surcharged, marginal_future_cost(values, discount));
  }
  // Cached: keep pays the store price, dropping earns the eviction credit.
  const double keep = prices.store_price + discount * values.cached;
  const double drop = discount * values.uncached - duals.storage_multiplier * size;
  return {false, keep <= drop};
}

std::vector<std::pair<int, ActionPair>> project_c4(
    const std::vector<ProjectionCandidate>& candidates, double hard_capacity) {
  if (!(hard_capacity > 0.0)) throw std::invalid_argument("project_c4: capacity must be > 0");

  std::vector<std::pair<int, ActionPair>> out;
  out.reserve(candidates.size());
  for (const ProjectionCandidate& c : candidates) out.emplace_back(c.file_id, c.proposed);

  std::vector<std::size_t> caching;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (candidates[i].proposed.cache) caching.push_back(i);
  std::sort(caching.begin(), caching.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].sort_key != candidates[b].sort_key)
      return candidates[a].sort_key < candidates[b].sort_key;
    return candidates[a].file_id < candidates[b].file_id;
  });

  double used = 0.0;
  for (std::size_t idx : caching) {
    const ProjectionCandidate& c = candidates[idx];
    if (used + c.size <= hard_capacity) {
      used += c.size;
    } else {
      // First-fit over the sorted order: skip and keep trying smaller files.
      const bool fetch = c.state.request && !c.state.cached;
      out[idx].second = {fetch, false};
    }
  }
  return out;
}

MqSlotResult mq_learning_step(std::vector<learning::QAgent>& agents,
                              const std::vector<SlotState>& states,
                              const std::vector<PriceSample>& prices,
                              const std::vector<double>& sizes, DualState& duals,
                              const CapacityConfig& config, double epsilon,
                              std::vector<env::RngStream>& exploration) {
  const std::size_t files = agents.size();
  if (states.size() != files || prices.size() != files || sizes.size() != files ||
      exploration.size() != files)
    throw std::invalid_argument("mq_learning_step: misaligned file lists");

  // Multipliers seen by this slot; the dual step below produces next slot's.
  const DualState slot_duals = duals;

  std::vector<PriceSample> augmented(files);
  std::vector<ActionPair> proposed(files);
  std::vector<ProjectionCandidate> candidates(files);
  for (std::size_t f = 0; f < files; ++f) {
    augmented[f] = augment_prices(prices[f], sizes[f], slot_duals);
    proposed[f] = agents[f].propose(states[f], augmented[f], epsilon, exploration[f]);
    candidates[f] = {static_cast<int>(f), proposed[f],
                     agents[f].score(states[f], proposed[f], augmented[f]), sizes[f],
                     states[f]};
  }

  const auto step_duals = [&](const std::vector<ActionPair>& basis) {
    duals.stepsize = config.dual_stepsize;
    if (config.storage_dual == StorageDualMode::long_term) {
      double cached = 0.0;
      for (std::size_t f = 0; f < files; ++f)
        if (basis[f].cache) cached += sizes[f];
      dual_update_capacity(duals, cached, config.soft_capacity);
    } else if (config.storage_dual == StorageDualMode::stability) {
      dual_update_stability(duals, basis, states, sizes);
    }
    if (config.backhaul_dual) {
      double fetched = 0.0;
      for (std::size_t f = 0; f < files; ++f)
        if (basis[f].fetch) fetched += sizes[f];
      dual_update_backhaul(duals, fetched, config.link_budget);
    }
  };

  if (config.any_dual() && !config.dual_update_post_projection) step_duals(proposed);

  MqSlotResult result;
  result.actions = proposed;
  if (config.enforce_hard) {
    const auto projected = project_c4(candidates, config.hard_capacity);
    for (std::size_t f = 0; f < files; ++f) result.actions[f] = projected[f].second;
  }

  if (config.any_dual() && config.dual_update_post_projection) step_duals(result.actions);

  for (std::size_t f = 0; f < files; ++f) {
    const ActionPair executed = result.actions[f];
    result.plain_cost += instantaneous_cost(executed, prices[f]);
    result.augmented_cost += instantaneous_cost(executed, augmented[f]);
    if (executed.cache) result.cached_bytes += sizes[f];
    if (executed.fetch) result.fetched_bytes += sizes[f];
    agents[f].commit(states[f], executed, augmented[f]);
  }
  return result;
}

}  // namespace edgecache::pricing
