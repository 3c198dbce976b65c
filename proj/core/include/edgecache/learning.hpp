#pragma once

#include <array>
#include <cstdint>

#include "edgecache/core.hpp"
#include "edgecache/env.hpp"

namespace edgecache::learning {

/// Running stochastic estimates of the two marginalized values, updated one
/// cache state at a time with step size in (0, 1).
struct ValueEstimate {
  double uncached_hat = 0.0;
  double cached_hat = 0.0;
  double stepsize = 0.1;
};

/// Tabular estimates of the sixteen marginalized state-action factors plus
/// per-factor visit counts. Only factors whose action is feasible for the
/// state are ever touched.
struct QEstimate {
  std::array<double, 16> factors{};
  std::array<std::uint32_t, 16> visits{};
  double stepsize = 0.1;

  double at(SlotState s, ActionPair a) const { return factors[factor_index(s, a)]; }
  double& at(SlotState s, ActionPair a) { return factors[factor_index(s, a)]; }

  /// Fraction of recorded visits whose state had a live request; 0.5 before
  /// any visit. Used to weight the two successor-request rows when reading
  /// a continuation value out of the table.
  double empirical_request_rate() const;
};

struct ExplorationSchedule {
  enum class Kind { constant, glie_inverse_t };
  Kind kind = Kind::constant;
  double epsilon = 0.01;

  /// Exploration probability at 1-based slot t; the GLIE schedule is 1/t.
  double value(long t) const;
};

/// Which bootstrap the factor update uses: the minimum over feasible next
/// actions (default), or the factor of the action actually selected greedily
/// at the next slot's prices.
enum class QBootstrap { min_feasible, next_selected };

/// Table-implied continuation value of ending a slot with cache bit
/// `next_cached`: empirical-request-rate weighted minimum over the feasible
/// factors of the two successor states.
double continuation_estimate(const QEstimate& est, bool next_cached);

/// Greedy selection score of one candidate action: realized prices on the
/// immediate term plus the discounted table-implied continuation. At a
/// converged table this reproduces the threshold decision rule, and it is
/// also the sort key the capacity projection consumes.
double action_score(const QEstimate& est, SlotState s, ActionPair a, const PriceSample& prices,
                    double discount);

/// Argmin of action_score over the feasible set; ties go to the
/// lexicographically smallest (fetch, cache).
ActionPair q_greedy_action(const QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount);

/// Epsilon-greedy wrapper: with probability epsilon picks uniformly from
/// the full feasible set, otherwise q_greedy_action.
ActionPair q_select_action(const QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount, double epsilon, env::RngStream& rng);

/// Applies the one-factor update for a visited transition: moves the
/// (state, taken) factor toward realized cost plus discounted minimum over
/// the feasible factors of the revealed successor state. All other factors
/// are untouched.
void q_apply_update(QEstimate& est, SlotState s, ActionPair taken, const PriceSample& prices,
                    double discount, bool next_request);

/// Variant bootstrapping on one explicit successor factor instead of the
/// minimum (used by the next_selected bootstrap mode).
void q_apply_update_at(QEstimate& est, SlotState s, ActionPair taken, const PriceSample& prices,
                       double discount, SlotState next_state, ActionPair next_action);

/// One full learning step: epsilon-greedy selection followed by the
/// one-factor update against the revealed next request. Returns the action
/// taken.
ActionPair q_learning_step(QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount, double epsilon, env::RngStream& rng,
                           bool next_request);

/// One step of the value-estimate scheme: act through the threshold rule at
/// the estimated marginal saving, then update only the entry of the current
/// cache state toward realized cost plus discounted estimate at the chosen
/// cache bit. Returns the action taken.
ActionPair stochastic_value_step(ValueEstimate& est, SlotState s, const PriceSample& prices,
                                 double discount);

/// Frozen greedy decision rule: a copy of the estimate exposed as a
/// (state, prices) -> action function.
class GreedyPolicy {
 public:
  GreedyPolicy(const QEstimate& est, double discount) : est_(est), discount_(discount) {}

  ActionPair operator()(SlotState s, const PriceSample& prices) const {
    return q_greedy_action(est_, s, prices, discount_);
  }

 private:
  QEstimate est_;
  double discount_;
};

inline GreedyPolicy greedy_policy(const QEstimate& est, double discount) {
  return GreedyPolicy(est, discount);
}

/// Slot-sequential learner owning one estimate. The factor update for slot t
/// needs the request revealed at t+1, so the runner calls observe_request
/// (or propose of the next slot) after the next reveal; the agent keeps the
/// pending transition in between.
class QAgent {
 public:
  QAgent(double discount, double stepsize, QBootstrap bootstrap = QBootstrap::min_feasible);

  /// Selection for the current slot. Completes any pending next_selected
  /// bootstrap first, using the same prices the selection sees.
  ActionPair propose(SlotState s, const PriceSample& selection_prices, double epsilon,
                     env::RngStream& rng);

  /// Records the transition that was actually executed this slot, with the
  /// prices the learner should treat as paid (augmented prices under dual
  /// pricing; equal to the raw prices otherwise).
  void commit(SlotState s, ActionPair executed, const PriceSample& learn_prices);

  /// Feeds the next slot's revealed request, completing the pending
  /// min-form update.
  void observe_request(bool next_request);

  double score(SlotState s, ActionPair a, const PriceSample& prices) const {
    return action_score(est_, s, a, prices, discount_);
  }

  const QEstimate& estimate() const { return est_; }
  QEstimate& estimate() { return est_; }
  double discount() const { return discount_; }

 private:
  QEstimate est_;
  double discount_;
  QBootstrap bootstrap_;
  struct Pending {
    SlotState state;
    ActionPair action;
    PriceSample prices;
    bool valid = false;
  } pending_;
};

}  // namespace edgecache::learning
