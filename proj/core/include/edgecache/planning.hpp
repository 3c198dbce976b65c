#pragma once

#include <array>
#include <utility>

#include "edgecache/core.hpp"
#include "edgecache/env.hpp"

namespace edgecache::planning {

/// Known per-file request/price distributions plus the discount factor.
/// Construction rejects discount outside (0, 1) and popularity outside
/// [0, 1]; the infinite-horizon formulation needs a strict discount.
struct FileModel {
  double popularity = 0.0;
  env::PriceModel store_prices;
  env::PriceModel fetch_prices;
  double discount = 0.9;

  FileModel(double popularity, env::PriceModel store, env::PriceModel fetch, double discount);
};

/// One exact Bellman backup of a value table: for each cache state,
/// enumerate request outcomes and the joint price support, take the best
/// feasible action, and average. No sampling is involved anywhere in the
/// offline solvers.
ValueTable bellman_backup(const FileModel& model, const ValueTable& values);

/// Fixed-point iteration of bellman_backup from (0, 0) until both entries
/// move by less than `tolerance`. The discount < 1 contraction guarantees
/// termination; the final backup residual is below discount * tolerance.
ValueTable value_iteration(const FileModel& model, double tolerance = 1e-9);

/// Max over the two cache states of |value - one-step backup|. Zero exactly
/// at the fixed point.
double bellman_residual(const FileModel& model, const ValueTable& values);

/// Residuals of the closed-form stationarity conditions, evaluated by
/// splitting the price support at the caching thresholds (keep/cache
/// probabilities and conditional expectations) rather than by direct
/// minimization. Returns |uncached - rhs|, |cached - rhs| in that order;
/// both vanish at the value_iteration output.
std::pair<double, double> closed_form_residual(const FileModel& model, const ValueTable& values);

/// Exhaustive two-dimensional search over value tables on a grid with the
/// given step and bounds (applied to both coordinates), minimizing the sum
/// of the closed-form residuals. Agrees with value_iteration to within one
/// grid step per coordinate when the bounds contain the fixed point.
ValueTable grid_search_solve(const FileModel& model, double grid_step,
                             std::pair<double, double> bounds);

/// Value table of the horizon-h lookahead policy: h = 0 is the expected
/// myopic slot cost (popularity * mean fetch price, 0), and each additional
/// horizon applies one backup with the policy induced by the previous
/// marginal cost. Converges to the value_iteration fixed point as h grows.
ValueTable finite_horizon_values(const FileModel& model, int horizon);

/// Cost of the always-fetch-never-cache policy,
/// popularity * mean fetch price / (1 - discount). An upper bound on the
/// uncached value and a convenient search bound for grid_search_solve.
double always_fetch_upper_bound(const FileModel& model);

/// The sixteen marginalized state-action cost factors. Only the eight
/// non-dominated pairs are solved for; the remaining slots stay inactive
/// (NaN).
struct QTable {
  std::array<double, 16> factors{};
  std::array<bool, 16> active{};

  double at(SlotState s, ActionPair a) const;
  /// Minimum over the reduced actions of one state.
  double state_min(SlotState s) const;
};

/// Fixed point of the marginalized factor ensemble over the eight reduced
/// pairs: each factor is the mean immediate cost plus the discounted,
/// popularity-weighted mix of successor factors, weighted by the
/// probability that each successor action is optimal under the marginal
/// saving implied by the current table. Solved by damped fixed-point
/// iteration (full steps by default, step size halved if the sup-change
/// grows repeatedly).
QTable q_factor_ensemble(const FileModel& model, double tolerance = 1e-9);

}  // namespace edgecache::planning
