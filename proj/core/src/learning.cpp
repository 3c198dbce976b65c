#include "edgecache/learning.hpp"

#include <limits>
#include <stdexcept>

namespace edgecache::learning {

namespace {

double feasible_min(const QEstimate& est, SlotState s) {
  double best = std::numeric_limits<double>::infinity();
  for (ActionPair a : feasible_actions(s)) best = std::min(best, est.at(s, a));
  return best;
}

}  // namespace

double QEstimate::empirical_request_rate() const {
  std::uint64_t total = 0;
  std::uint64_t requested = 0;
  for (int i = 0; i < 16; ++i) {
    total += visits[i];
    if (state_from_index(i / 4).request) requested += visits[i];
  }
  if (total == 0) return 0.5;
  return static_cast<double>(requested) / static_cast<double>(total);
}

double ExplorationSchedule::value(long t) const {
  if (kind == Kind::constant) return epsilon;
  return t >= 1 ? 1.0 / static_cast<double>(t) : 1.0;
}

double continuation_estimate(const QEstimate& est, bool next_cached) {
  const double rate = est.empirical_request_rate();
  const double idle = feasible_min(est, {false, next_cached});
  const double busy = feasible_min(est, {true, next_cached});
  return (1.0 - rate) * idle + rate * busy;
}

double action_score(const QEstimate& est, SlotState s, ActionPair a, const PriceSample& prices,
                    double discount) {
  (void)s;
  return instantaneous_cost(a, prices) + discount * continuation_estimate(est, a.cache);
}

ActionPair q_greedy_action(const QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount) {
  ActionPair best{};
  double best_score = std::numeric_limits<double>::infinity();
  for (ActionPair a : feasible_actions(s)) {  // lexicographic order fixes ties
    const double score = action_score(est, s, a, prices, discount);
    if (score < best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

ActionPair q_select_action(const QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount, double epsilon, env::RngStream& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    const ActionSet feasible = feasible_actions(s);
    return feasible[rng.uniform_int(feasible.size())];
  }
  return q_greedy_action(est, s, prices, discount);
}

void q_apply_update(QEstimate& est, SlotState s, ActionPair taken, const PriceSample& prices,
                    double discount, bool next_request) {
  const SlotState next{next_request, taken.cache};
  const double target =
      instantaneous_cost(taken, prices) + discount * feasible_min(est, next);
  const int idx = factor_index(s, taken);
  est.factors[idx] = (1.0 - est.stepsize) * est.factors[idx] + est.stepsize * target;
  est.visits[idx] += 1;
}

void q_apply_update_at(QEstimate& est, SlotState s, ActionPair taken, const PriceSample& prices,
                       double discount, SlotState next_state, ActionPair next_action) {
  const double target =
      instantaneous_cost(taken, prices) + discount * est.at(next_state, next_action);
  const int idx = factor_index(s, taken);
  est.factors[idx] = (1.0 - est.stepsize) * est.factors[idx] + est.stepsize * target;
  est.visits[idx] += 1;
}

ActionPair q_learning_step(QEstimate& est, SlotState s, const PriceSample& prices,
                           double discount, double epsilon, env::RngStream& rng,
                           bool next_request) {
  const ActionPair taken = q_select_action(est, s, prices, discount, epsilon, rng);
  q_apply_update(est, s, taken, prices, discount, next_request);
  return taken;
}

ActionPair stochastic_value_step(ValueEstimate& est, SlotState s, const PriceSample& prices,
                                 double discount) {
  const MarginalFutureCost saving{discount * (est.uncached_hat - est.cached_hat)};
  const ActionPair action = bellman_decide(s, prices, saving);
  const double continuation = action.cache ? est.cached_hat : est.uncached_hat;
  const double target = instantaneous_cost(action, prices) + discount * continuation;
  double& entry = s.cached ? est.cached_hat : est.uncached_hat;
  entry = (1.0 - est.stepsize) * entry + est.stepsize * target;
  return action;
}

QAgent::QAgent(double discount, double stepsize, QBootstrap bootstrap)
    : discount_(discount), bootstrap_(bootstrap) {
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("q agent: discount must lie in (0, 1)");
  if (!(stepsize > 0.0 && stepsize < 1.0))
    throw std::invalid_argument("q agent: stepsize must lie in (0, 1)");
  est_.stepsize = stepsize;
}

ActionPair QAgent::propose(SlotState s, const PriceSample& selection_prices, double epsilon,
                           env::RngStream& rng) {
  if (pending_.valid && bootstrap_ == QBootstrap::next_selected) {
    // Bootstrap on the factor the pre-update table picks greedily at the
    // next slot's prices, then apply the update.
    const ActionPair starred = q_greedy_action(est_, s, selection_prices, discount_);
    q_apply_update_at(est_, pending_.state, pending_.action, pending_.prices, discount_, s,
                      starred);
    pending_.valid = false;
  }
  return q_select_action(est_, s, selection_prices, discount_, epsilon, rng);
}

void QAgent::commit(SlotState s, ActionPair executed, const PriceSample& learn_prices) {
  pending_ = {s, executed, learn_prices, true};
}

void QAgent::observe_request(bool next_request) {
  if (!pending_.valid || bootstrap_ != QBootstrap::min_feasible) return;
  q_apply_update(est_, pending_.state, pending_.action, pending_.prices, discount_, next_request);
  pending_.valid = false;
}

}  // namespace edgecache::learning
