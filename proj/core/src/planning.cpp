#include "edgecache/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace edgecache::planning {

namespace {

constexpr int kMaxIterations = 20'000'000;

double state_value(const ValueTable& v, bool cached) {
  return cached ? v.cached : v.uncached;
}

}  // namespace

FileModel::FileModel(double popularity, env::PriceModel store, env::PriceModel fetch,
                     double discount)
    : popularity(popularity),
      store_prices(std::move(store)),
      fetch_prices(std::move(fetch)),
      discount(discount) {
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("file model: discount must lie in (0, 1)");
  if (!(popularity >= 0.0 && popularity <= 1.0))
    throw std::invalid_argument("file model: popularity must lie in [0, 1]");
}

ValueTable bellman_backup(const FileModel& model, const ValueTable& values) {
  ValueTable next;
  for (int cached = 0; cached <= 1; ++cached) {
    double expected = 0.0;
    for (int request = 0; request <= 1; ++request) {
      const double p_request = request ? model.popularity : 1.0 - model.popularity;
      if (p_request == 0.0) continue;
      const SlotState state{request != 0, cached != 0};
      for (const auto& rho : model.store_prices.support()) {
        for (const auto& lambda : model.fetch_prices.support()) {
          const PriceSample prices{rho.value, lambda.value};
          double best = std::numeric_limits<double>::infinity();
          for (ActionPair a : feasible_actions(state)) {
            const double cost = instantaneous_cost(a, prices) +
                                model.discount * state_value(values, a.cache);
            best = std::min(best, cost);
          }
          expected += p_request * rho.probability * lambda.probability * best;
        }
      }
    }
    (cached ? next.cached : next.uncached) = expected;
  }
  return next;
}

ValueTable value_iteration(const FileModel& model, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be > 0");
  ValueTable values{0.0, 0.0};
  for (int i = 0; i < kMaxIterations; ++i) {
    const ValueTable next = bellman_backup(model, values);
    const double change = std::max(std::abs(next.uncached - values.uncached),
                                   std::abs(next.cached - values.cached));
    values = next;
    if (change < tolerance) return values;
  }
  throw std::runtime_error("value_iteration: iteration limit reached");
}

double bellman_residual(const FileModel& model, const ValueTable& values) {
  const ValueTable backup = bellman_backup(model, values);
  return std::max(std::abs(values.uncached - backup.uncached),
                  std::abs(values.cached - backup.cached));
}

std::pair<double, double> closed_form_residual(const FileModel& model, const ValueTable& values) {
  const double gamma = model.discount;
  const double saving = gamma * (values.uncached - values.cached);

  // Cached state: keep when the store price does not exceed the saving
  // (ties cache). Split the store support into keep probability plus the
  // conditional keep cost versus the drop continuation.
  double keep_prob = 0.0;
  double keep_cost = 0.0;  // probability-weighted E[rho + gamma * cached | keep]
  for (const auto& rho : model.store_prices.support()) {
    if (rho.value <= saving) {
      keep_prob += rho.probability;
      keep_cost += rho.probability * (rho.value + gamma * values.cached);
    }
  }
  const double rhs_cached = (1.0 - keep_prob) * gamma * values.uncached + keep_cost;

  // Uncached, no request: prefetch-and-cache when fetch + store prices stay
  // within the saving; otherwise idle.
  double idle_prob = 1.0;
  double enter_cost = 0.0;
  for (const auto& rho : model.store_prices.support()) {
    for (const auto& lambda : model.fetch_prices.support()) {
      if (lambda.value + rho.value <= saving) {
        const double prob = rho.probability * lambda.probability;
        idle_prob -= prob;
        enter_cost += prob * (lambda.value + rho.value + gamma * values.cached);
      }
    }
  }
  const double no_request_branch = idle_prob * gamma * values.uncached + enter_cost;

  // Uncached, requested: the fetch is forced, after which the keep/drop
  // split matches the cached state.
  const double request_branch = model.fetch_prices.mean() + rhs_cached;

  const double p = model.popularity;
  const double rhs_uncached = (1.0 - p) * no_request_branch + p * request_branch;

  return {std::abs(values.uncached - rhs_uncached), std::abs(values.cached - rhs_cached)};
}

ValueTable grid_search_solve(const FileModel& model, double grid_step,
                             std::pair<double, double> bounds) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_search_solve: grid step must be > 0");
  if (!(bounds.second >= bounds.first))
    throw std::invalid_argument("grid_search_solve: empty bounds");
  const int steps = static_cast<int>(std::floor((bounds.second - bounds.first) / grid_step));
  ValueTable best{bounds.first, bounds.first};
  double best_score = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const ValueTable candidate{bounds.first + i * grid_step, bounds.first + j * grid_step};
      const auto [r0, r1] = closed_form_residual(model, candidate);
      const double score = r0 + r1;
      if (score < best_score) {
        best_score = score;
        best = candidate;
      }
    }
  }
  return best;
}

ValueTable finite_horizon_values(const FileModel& model, int horizon) {
  if (horizon < 0) throw std::invalid_argument("finite_horizon_values: horizon < 0");
  // The horizon-h table is h+1 backups from zero: the backup takes the
  // pointwise best action, which is exactly the action induced by the
  // previous table's marginal saving.
  ValueTable values{0.0, 0.0};
  for (int h = 0; h <= horizon; ++h) values = bellman_backup(model, values);
  return values;
}

double always_fetch_upper_bound(const FileModel& model) {
  return model.popularity * model.fetch_prices.mean() / (1.0 - model.discount);
}

double QTable::at(SlotState s, ActionPair a) const {
  return factors[factor_index(s, a)];
}

double QTable::state_min(SlotState s) const {
  double best = std::numeric_limits<double>::infinity();
  for (ActionPair a : reduced_actions(s)) best = std::min(best, at(s, a));
  return best;
}

QTable q_factor_ensemble(const FileModel& model, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("q_factor_ensemble: tolerance must be > 0");
  QTable table;
  table.factors.fill(std::numeric_limits<double>::quiet_NaN());
  for (int si = 0; si < 4; ++si) {
    const SlotState state = state_from_index(si);
    for (ActionPair a : reduced_actions(state)) {
      table.factors[factor_index(state, a)] = 0.0;
      table.active[factor_index(state, a)] = true;
    }
  }

  const double p = model.popularity;
  const double gamma = model.discount;
  const double mean_fetch = model.fetch_prices.mean();
  const double mean_store = model.store_prices.mean();

  double damping = 1.0;
  double previous_change = std::numeric_limits<double>::infinity();
  int growth_streak = 0;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Marginal saving implied by the current table: popularity-weighted
    // state minima stand in for the value function.
    double implied[2];
    for (int cached = 0; cached <= 1; ++cached) {
      implied[cached] = (1.0 - p) * table.state_min({false, cached != 0}) +
                        p * table.state_min({true, cached != 0});
    }
    const MarginalFutureCost saving{gamma * (implied[0] - implied[1])};

    // Probability that each reduced successor action is optimal, per
    // successor state, from enumerating the price support.
    std::array<double, 16> optimal_prob{};
    for (int si = 0; si < 4; ++si) {
      const SlotState state = state_from_index(si);
      for (const auto& rho : model.store_prices.support()) {
        for (const auto& lambda : model.fetch_prices.support()) {
          const ActionPair chosen =
              bellman_decide(state, {rho.value, lambda.value}, saving);
          optimal_prob[factor_index(state, chosen)] += rho.probability * lambda.probability;
        }
      }
    }

    std::array<double, 16> next = table.factors;
    double change = 0.0;
    for (int si = 0; si < 4; ++si) {
      const SlotState state = state_from_index(si);
      for (ActionPair action : reduced_actions(state)) {
        double continuation = 0.0;
        for (int request = 0; request <= 1; ++request) {
          const double p_request = request ? p : 1.0 - p;
          if (p_request == 0.0) continue;
          const SlotState successor{request != 0, action.cache};
          for (ActionPair z : reduced_actions(successor)) {
            continuation += p_request * optimal_prob[factor_index(successor, z)] *
                            table.at(successor, z);
          }
        }
        const double target = mean_fetch * (action.fetch ? 1.0 : 0.0) +
                              mean_store * (action.cache ? 1.0 : 0.0) + gamma * continuation;
        const int idx = factor_index(state, action);
        const double updated = (1.0 - damping) * table.factors[idx] + damping * target;
        change = std::max(change, std::abs(updated - table.factors[idx]));
        next[idx] = updated;
      }
    }
    table.factors = next;
    if (change < tolerance) return table;

    // Halve the step if the sup-change keeps growing (oscillation guard).
    if (change > previous_change) {
      if (++growth_streak >= 3 && damping > 0.125) {
        damping *= 0.5;
        growth_streak = 0;
      }
    } else {
      growth_streak = 0;
    }
    previous_change = change;
  }
  throw std::runtime_error("q_factor_ensemble: iteration limit reached");
}

}  // namespace edgecache::planning
