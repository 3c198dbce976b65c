#include <doctest.h>

#include <random>

#include "edgecache/core.hpp"
#include "edgecache/env.hpp"
#include "edgecache/planning.hpp"
#include "oracles.hpp"

using namespace edgecache;

TEST_CASE("feasible action sets match the constraint table") {
  CHECK(feasible_actions({false, false}).size() == 3);
  CHECK(feasible_actions({true, false}).size() == 2);
  CHECK(feasible_actions({false, true}).size() == 4);
  CHECK(feasible_actions({true, true}).size() == 4);

  // A request without cached content forces a fetch.
  const ActionSet forced = feasible_actions({true, false});
  CHECK(forced.contains({true, false}));
  CHECK(forced.contains({true, true}));
  CHECK(!forced.contains({false, false}));

  // Caching without availability is forbidden.
  CHECK(!feasible_actions({false, false}).contains({false, true}));

  // Cross-check against the raw constraints.
  for (int si = 0; si < 4; ++si) {
    const SlotState s = state_from_index(si);
    for (int ai = 0; ai < 4; ++ai) {
      const ActionPair a = action_from_index(ai);
      CHECK(feasible_actions(s).contains(a) ==
            oracle::feasible(s.request, s.cached, a.fetch, a.cache));
    }
  }
}

TEST_CASE("reduced sets cover exactly eight pairs and stay feasible") {
  int pairs = 0;
  for (int si = 0; si < 4; ++si) {
    const SlotState s = state_from_index(si);
    const ActionSet reduced = reduced_actions(s);
    CHECK(reduced.size() == 2);
    pairs += reduced.size();
    for (ActionPair a : reduced) CHECK(feasible_actions(s).contains(a));
  }
  CHECK(pairs == 8);

  CHECK(reduced_actions({false, false}).contains({false, false}));
  CHECK(reduced_actions({false, false}).contains({true, true}));
  CHECK(reduced_actions({false, true}).contains({false, false}));
  CHECK(reduced_actions({false, true}).contains({false, true}));
  CHECK(reduced_actions({true, false}).contains({true, false}));
  CHECK(reduced_actions({true, false}).contains({true, true}));
}

TEST_CASE("dominated actions never beat the reduced set") {
  // On random models, the best feasible action is always matched by some
  // reduced action, price point by price point, at the converged values.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double p = unit(rng);
    const double store_mean = 0.5 + 30.0 * unit(rng);
    const double fetch_mean = 5.0 + 50.0 * unit(rng);
    oracle::Model model{p,
                        {{store_mean * 0.9, 0.5}, {store_mean * 1.1, 0.5}},
                        {{fetch_mean * 0.9, 0.5}, {fetch_mean * 1.1, 0.5}},
                        0.9};
    const auto [v0, v1] = oracle::solve_values(model);
    for (int si = 0; si < 4; ++si) {
      const SlotState s = state_from_index(si);
      for (const auto& rho : model.store) {
        for (const auto& lambda : model.fetch) {
          const PriceSample prices{rho.value, lambda.value};
          double best_feasible = 1e300, best_reduced = 1e300;
          for (ActionPair a : feasible_actions(s)) {
            const double c = instantaneous_cost(a, prices) + 0.9 * (a.cache ? v1 : v0);
            best_feasible = std::min(best_feasible, c);
          }
          for (ActionPair a : reduced_actions(s)) {
            const double c = instantaneous_cost(a, prices) + 0.9 * (a.cache ? v1 : v0);
            best_reduced = std::min(best_reduced, c);
          }
          CHECK(best_reduced == doctest::Approx(best_feasible).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("instantaneous cost") {
  CHECK(instantaneous_cost({false, false}, {7.0, 9.0}) == 0.0);
  CHECK(instantaneous_cost({true, true}, {1.0, 4.0}) == 5.0);
  CHECK(instantaneous_cost({true, false}, {7.0, 4.0}) == 4.0);
}

TEST_CASE("threshold decisions") {
  CHECK(bellman_decide({true, false}, {1.0, 4.0}, {2.0}) == ActionPair{true, true});
  CHECK(bellman_decide({false, false}, {1.0, 4.0}, {2.0}) == ActionPair{false, false});
  // Equality ties to caching.
  CHECK(bellman_decide({false, true}, {0.0, 4.0}, {0.0}) == ActionPair{false, true});
}

TEST_CASE("decisions stay inside the reduced set") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const SlotState s = state_from_index(static_cast<int>(unit(rng) * 4));
    const PriceSample prices{20.0 * unit(rng), 50.0 * unit(rng)};
    const MarginalFutureCost saving{40.0 * unit(rng)};
    const ActionPair chosen = bellman_decide(s, prices, saving);
    CHECK(reduced_actions(s).contains(chosen));
    CHECK(feasible_actions(s).contains(chosen));
  }
}

TEST_CASE("cache bit is monotone in prices") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const SlotState s = state_from_index(static_cast<int>(unit(rng) * 4));
    const MarginalFutureCost saving{30.0 * unit(rng)};
    const double rho = 30.0 * unit(rng);
    const double lambda = 30.0 * unit(rng);
    const bool base = bellman_decide(s, {rho, lambda}, saving).cache;
    const bool pricier_store = bellman_decide(s, {rho + 5.0, lambda}, saving).cache;
    CHECK(static_cast<int>(pricier_store) <= static_cast<int>(base));
    if (!s.request && !s.cached) {
      const bool pricier_fetch = bellman_decide(s, {rho, lambda + 5.0}, saving).cache;
      CHECK(static_cast<int>(pricier_fetch) <= static_cast<int>(base));
    }
  }
}

TEST_CASE("marginal future cost follows the table") {
  const ValueTable v{6.0, 2.0};
  CHECK(marginal_future_cost(v, 0.5).value == doctest::Approx(2.0));
  CHECK(marginal_future_cost(v, 0.9).value >= 0.0);
}
