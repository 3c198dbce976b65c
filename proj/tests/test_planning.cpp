#include <doctest.h>

#include <cmath>
#include <random>

#include "edgecache/planning.hpp"
#include "oracles.hpp"

using namespace edgecache;
using namespace edgecache::planning;

namespace {

FileModel hand_model() {
  // Deterministic model with a hand-derivable fixed point: uncached = 6,
  // cached = 2 (cache once, then keep paying the store price).
  return FileModel(1.0, env::two_point_model(1.0, 0.0), env::two_point_model(4.0, 0.0), 0.5);
}

oracle::Model to_oracle(const FileModel& m) {
  oracle::Model out;
  out.popularity = m.popularity;
  out.discount = m.discount;
  for (const auto& a : m.store_prices.support()) out.store.push_back({a.value, a.probability});
  for (const auto& a : m.fetch_prices.support()) out.fetch.push_back({a.value, a.probability});
  return out;
}

FileModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = unit(rng);
  const double store_mean = 0.5 + 40.0 * unit(rng);
  const double fetch_mean = 10.0 + 50.0 * unit(rng);
  const double gamma = std::array{0.5, 0.9, 0.99}[static_cast<int>(unit(rng) * 3)];
  const bool four_point = unit(rng) < 0.5;
  const auto model = [&](double mean) {
    const double spread = mean * (0.05 + 0.4 * unit(rng));
    return four_point ? env::symmetric_support_model(mean, spread, 4)
                      : env::two_point_model(mean, spread);
  };
  return FileModel(p, model(store_mean), model(fetch_mean), gamma);
}

}  // namespace

TEST_CASE("model construction guards") {
  CHECK_THROWS_AS(FileModel(0.5, env::two_point_model(1, 0), env::two_point_model(1, 0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FileModel(0.5, env::two_point_model(1, 0), env::two_point_model(1, 0), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FileModel(1.5, env::two_point_model(1, 0), env::two_point_model(1, 0), 0.9),
                  std::invalid_argument);
}

TEST_CASE("value iteration on degenerate models") {
  // No requests: doing nothing is optimal and free.
  const FileModel idle(0.0, env::two_point_model(3, 0.3), env::two_point_model(40, 4), 0.9);
  const ValueTable v_idle = value_iteration(idle);
  CHECK(v_idle.uncached == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(v_idle.cached == doctest::Approx(0.0).epsilon(1e-9));

  // Free fetching dominates any caching.
  const FileModel free_fetch(0.5, env::two_point_model(3, 0.3), env::two_point_model(0, 0), 0.9);
  const ValueTable v_free = value_iteration(free_fetch);
  CHECK(v_free.uncached == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(v_free.cached == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("hand fixed point and oracle agreement") {
  const FileModel m = hand_model();
  const ValueTable v = value_iteration(m, 1e-12);
  CHECK(v.uncached == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(v.cached == doctest::Approx(2.0).epsilon(1e-9));

  const auto [o0, o1] = oracle::solve_values(to_oracle(m));
  CHECK(v.uncached == doctest::Approx(o0).epsilon(1e-10));
  CHECK(v.cached == doctest::Approx(o1).epsilon(1e-10));
}

TEST_CASE("value table invariants on random models") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const FileModel m = random_model(rng);
    const ValueTable v = value_iteration(m);
    CHECK(v.cached >= -1e-9);
    CHECK(v.cached <= v.uncached + 1e-9);
    CHECK(v.uncached - v.cached <= m.fetch_prices.max_value() + 1e-9);
    CHECK(v.uncached <= always_fetch_upper_bound(m) + 1e-9);
  }
}

TEST_CASE("successive iterates contract") {
  const FileModel m(0.6, env::two_point_model(5, 0.5), env::two_point_model(30, 3), 0.9);
  ValueTable prev{0, 0};
  ValueTable cur = bellman_backup(m, prev);
  double prev_change = std::max(std::abs(cur.uncached - prev.uncached),
                                std::abs(cur.cached - prev.cached));
  for (int i = 0; i < 60; ++i) {
    const ValueTable next = bellman_backup(m, cur);
    const double change = std::max(std::abs(next.uncached - cur.uncached),
                                   std::abs(next.cached - cur.cached));
    CHECK(change <= m.discount * prev_change + 1e-12);
    prev = cur;
    cur = next;
    prev_change = change;
  }
}

TEST_CASE("bellman residual") {
  const FileModel m = hand_model();
  const ValueTable fixed_point{6.0, 2.0};
  CHECK(bellman_residual(m, fixed_point) == doctest::Approx(0.0).epsilon(1e-12));

  // One backup from zero: the uncached state pays the forced fetch (4), the
  // cached state serves for free.
  const ValueTable zero{0.0, 0.0};
  const auto backed = oracle::backup(to_oracle(m), {0.0, 0.0});
  CHECK(backed.first == doctest::Approx(4.0));
  CHECK(backed.second == doctest::Approx(0.0));
  CHECK(bellman_residual(m, zero) == doctest::Approx(4.0).epsilon(1e-12));

  // Tables violating cached <= uncached cannot be fixed points.
  CHECK(bellman_residual(m, ValueTable{2.0, 6.0}) > 0.0);
}

TEST_CASE("closed-form residuals vanish at the fixed point") {
  const FileModel m = hand_model();
  const ValueTable v = value_iteration(m, 1e-12);
  const auto [r0, r1] = closed_form_residual(m, v);
  CHECK(r0 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r1 == doctest::Approx(0.0).epsilon(1e-9));

  const FileModel idle(0.0, env::two_point_model(3, 0.3), env::two_point_model(40, 4), 0.9);
  const auto [i0, i1] = closed_form_residual(idle, ValueTable{0.0, 0.0});
  CHECK(i0 == doctest::Approx(0.0));
  CHECK(i1 == doctest::Approx(0.0));

  // Perturbing the uncached entry moves its residual linearly while the
  // decisions stay on the caching branch.
  const auto [p0, p1] = closed_form_residual(m, ValueTable{6.5, 2.0});
  CHECK(p0 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p1 == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("closed-form route agrees with the direct backup route") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const FileModel m = random_model(rng);
    // Arbitrary tables, not just fixed points.
    const ValueTable table{60.0 * unit(rng), 30.0 * unit(rng)};
    const auto backed = oracle::backup(to_oracle(m), {table.uncached, table.cached});
    const auto [r0, r1] = closed_form_residual(m, table);
    CHECK(r0 == doctest::Approx(std::abs(table.uncached - backed.first)).epsilon(1e-10));
    CHECK(r1 == doctest::Approx(std::abs(table.cached - backed.second)).epsilon(1e-10));
  }
}

TEST_CASE("grid search") {
  const FileModel m = hand_model();
  const ValueTable coarse = grid_search_solve(m, 0.01, {0.0, 8.0});
  CHECK(coarse.uncached == doctest::Approx(6.0).epsilon(0.011 / 6.0));
  CHECK(coarse.cached == doctest::Approx(2.0).epsilon(0.011 / 2.0));

  const FileModel idle(0.0, env::two_point_model(3, 0.3), env::two_point_model(40, 4), 0.9);
  const ValueTable zero = grid_search_solve(idle, 0.05, {0.0, 2.0});
  CHECK(zero.uncached == doctest::Approx(0.0));
  CHECK(zero.cached == doctest::Approx(0.0));

  // The stationarity residual has a valley whose flat direction scales like
  // 1 / (1 - discount), so the argmin can sit that many grid steps from the
  // fixed point; the error bound must carry the conditioning factor.
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const FileModel model = random_model(rng);
    const ValueTable truth = value_iteration(model, 1e-11);
    const double bound = std::max(1.0, always_fetch_upper_bound(model) * 1.02);
    const double step = bound / 160.0;
    const ValueTable grid = grid_search_solve(model, step, {0.0, bound});
    const double limit = step / (1.0 - model.discount) + 1e-9;
    CHECK(std::abs(grid.uncached - truth.uncached) <= limit);
    CHECK(std::abs(grid.cached - truth.cached) <= limit);

    // Argmin optimality: the returned point scores no worse than the grid
    // point nearest the true fixed point.
    const auto [g0, g1] = closed_form_residual(model, grid);
    const ValueTable nearest{std::round(truth.uncached / step) * step,
                             std::round(truth.cached / step) * step};
    const auto [n0, n1] = closed_form_residual(model, nearest);
    CHECK(g0 + g1 <= n0 + n1 + 1e-9);
  }
}

TEST_CASE("finite-horizon tables") {
  const FileModel half(0.5, env::two_point_model(2, 0.2), env::two_point_model(44, 4.4), 0.9);
  const ValueTable h0 = finite_horizon_values(half, 0);
  CHECK(h0.uncached == doctest::Approx(0.5 * 44.0).epsilon(1e-12));
  CHECK(h0.cached == doctest::Approx(0.0));

  const FileModel idle(0.0, env::two_point_model(3, 0.3), env::two_point_model(40, 4), 0.9);
  for (int h : {0, 1, 5}) {
    const ValueTable v = finite_horizon_values(idle, h);
    CHECK(v.uncached == doctest::Approx(0.0));
    CHECK(v.cached == doctest::Approx(0.0));
  }

  const FileModel m = hand_model();
  const ValueTable deep = finite_horizon_values(m, 50);
  CHECK(deep.uncached == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(deep.cached == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("longer lookahead never hurts") {
  // True discounted cost of the lookahead policy, evaluated exactly on the
  // two-state chain, is non-increasing in the horizon.
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 25; ++trial) {
    const FileModel m = random_model(rng);
    const oracle::Model om = to_oracle(m);
    double previous = std::numeric_limits<double>::infinity();
    for (int h = 0; h <= 6; ++h) {
      double saving = 0.0;
      if (h >= 1) {
        const ValueTable table = finite_horizon_values(m, h - 1);
        saving = m.discount * (table.uncached - table.cached);
      }
      const auto [v0, v1] = oracle::rule_value(om, oracle::threshold_rule(saving));
      CHECK(v0 <= previous + 1e-9);
      previous = v0;
      (void)v1;
    }
  }
}

TEST_CASE("factor ensemble on the hand model") {
  const FileModel m = hand_model();
  const QTable q = q_factor_ensemble(m, 1e-12);
  CHECK(q.at({true, false}, {true, true}) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(q.at({true, false}, {true, false}) == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(q.at({true, true}, {false, true}) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(q.at({true, true}, {false, false}) == doctest::Approx(3.0).epsilon(1e-9));

  const ValueTable v = value_iteration(m, 1e-12);
  CHECK(q.state_min({true, false}) == doctest::Approx(v.uncached).epsilon(1e-9));
  CHECK(q.state_min({true, true}) == doctest::Approx(v.cached).epsilon(1e-9));
}

TEST_CASE("factor ensemble on a no-request model") {
  const FileModel idle(0.0, env::two_point_model(3, 0.3), env::two_point_model(40, 4), 0.9);
  const QTable q = q_factor_ensemble(idle, 1e-12);
  for (int si = 0; si < 4; ++si) {
    const SlotState s = state_from_index(si);
    if (reduced_actions(s).contains({false, false}))
      CHECK(q.at(s, {false, false}) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

namespace {

// Residual of the ensemble equation itself at a converged table.
double ensemble_self_residual(const FileModel& m, const QTable& q) {
  const double p = m.popularity;
  const double gamma = m.discount;
  double implied[2];
  for (int cached = 0; cached <= 1; ++cached)
    implied[cached] = (1.0 - p) * q.state_min({false, cached != 0}) +
                      p * q.state_min({true, cached != 0});
  const MarginalFutureCost saving{gamma * (implied[0] - implied[1])};

  double worst = 0.0;
  for (int si = 0; si < 4; ++si) {
    const SlotState state = state_from_index(si);
    for (ActionPair action : reduced_actions(state)) {
      double continuation = 0.0;
      for (int request = 0; request <= 1; ++request) {
        const double pr = request ? p : 1.0 - p;
        if (pr == 0.0) continue;
        const SlotState successor{request != 0, action.cache};
        for (const auto& rho : m.store_prices.support()) {
          for (const auto& lambda : m.fetch_prices.support()) {
            const ActionPair z = bellman_decide(successor, {rho.value, lambda.value}, saving);
            continuation +=
                pr * rho.probability * lambda.probability * q.at(successor, z);
          }
        }
      }
      const double rhs = m.fetch_prices.mean() * (action.fetch ? 1 : 0) +
                         m.store_prices.mean() * (action.cache ? 1 : 0) + gamma * continuation;
      worst = std::max(worst, std::abs(q.at(state, action) - rhs));
    }
  }
  return worst;
}

// True when no support point sits on the far side of a decision threshold
// from its mean, i.e. optimal successor actions do not depend on the
// realized prices. On such models the marginalized factors must be exactly
// consistent with the value table.
bool price_independent_decisions(const FileModel& m, const ValueTable& v) {
  const MarginalFutureCost saving = marginal_future_cost(v, m.discount);
  for (int si = 0; si < 4; ++si) {
    const SlotState s = state_from_index(si);
    ActionPair first{};
    bool have = false;
    for (const auto& rho : m.store_prices.support()) {
      for (const auto& lambda : m.fetch_prices.support()) {
        const ActionPair chosen = bellman_decide(s, {rho.value, lambda.value}, saving);
        if (!have) {
          first = chosen;
          have = true;
        } else if (!(chosen == first)) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("factor ensemble satisfies its own equation everywhere") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    const FileModel m = random_model(rng);
    const QTable q = q_factor_ensemble(m, 1e-11);
    CHECK(ensemble_self_residual(m, q) < 1e-8);
  }
}

TEST_CASE("factor minima agree with the value table when prices never flip decisions") {
  std::mt19937_64 rng(73);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 25; ++trial) {
    const FileModel m = random_model(rng);
    const ValueTable v = value_iteration(m, 1e-11);
    if (!price_independent_decisions(m, v)) continue;
    ++checked;
    const QTable q = q_factor_ensemble(m, 1e-11);
    for (int cached = 0; cached <= 1; ++cached) {
      const double implied = (1.0 - m.popularity) * q.state_min({false, cached != 0}) +
                             m.popularity * q.state_min({true, cached != 0});
      const double expected = cached ? v.cached : v.uncached;
      CHECK(implied == doctest::Approx(expected).epsilon(1e-6));
    }
  }
  CHECK(checked >= 10);
}
