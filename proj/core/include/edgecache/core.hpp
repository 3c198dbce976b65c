#pragma once

#include <array>
#include <cstdint>

namespace edgecache {

/// Observable per-file state at the start of a slot: is the file requested
/// now, and does it sit in the local cache (decided at the end of the
/// previous slot).
struct SlotState {
  bool request = false;
  bool cached = false;

  friend constexpr bool operator==(SlotState, SlotState) = default;
};

/// Per-file decision pair for one slot: fetch the file over the back-haul
/// and/or keep it cached for the next slot.
struct ActionPair {
  bool fetch = false;
  bool cache = false;

  friend constexpr bool operator==(ActionPair, ActionPair) = default;
};

/// One realization of the per-slot prices: the cost of caching the file for
/// one slot and the cost of fetching it once. Both are nonnegative.
struct PriceSample {
  double store_price = 0.0;
  double fetch_price = 0.0;
};

/// Expected optimal cost-to-go per cache state, marginalized over requests
/// and prices. Invariants: 0 <= cached <= uncached, and
/// uncached - cached <= max fetch price (one fetch moves between the states).
struct ValueTable {
  double uncached = 0.0;  // cost-to-go entering a slot without the file
  double cached = 0.0;    // cost-to-go entering a slot with the file

  friend constexpr bool operator==(ValueTable, ValueTable) = default;
};

/// Discounted saving from ending the slot with the file cached:
/// discount * (uncached - cached). Nonnegative for any valid ValueTable.
struct MarginalFutureCost {
  double value = 0.0;
};

constexpr MarginalFutureCost marginal_future_cost(const ValueTable& v, double discount) {
  return {discount * (v.uncached - v.cached)};
}

/// Small fixed-capacity action container; iteration order is lexicographic
/// in (fetch, cache), which also fixes tie-breaking everywhere.
class ActionSet {
 public:
  constexpr ActionSet() = default;

  constexpr void add(ActionPair a) { items_[size_++] = a; }
  constexpr int size() const { return size_; }
  constexpr ActionPair operator[](int i) const { return items_[i]; }
  constexpr const ActionPair* begin() const { return items_.data(); }
  constexpr const ActionPair* end() const { return items_.data() + size_; }

  constexpr bool contains(ActionPair a) const {
    for (int i = 0; i < size_; ++i)
      if (items_[i] == a) return true;
    return false;
  }

 private:
  std::array<ActionPair, 4> items_{};
  int size_ = 0;
};

/// All (fetch, cache) pairs allowed in the given state: a request must be
/// served (request <= fetch + cached) and only available content can be
/// cached (cache <= cached + fetch). Never empty; cardinalities per state
/// (request, cached) are (0,0):3, (1,0):2, (0,1):4, (1,1):4.
constexpr ActionSet feasible_actions(SlotState s) {
  ActionSet out;
  for (int fetch = 0; fetch <= 1; ++fetch) {
    for (int cache = 0; cache <= 1; ++cache) {
      if (s.request && !fetch && !s.cached) continue;
      if (cache && !s.cached && !fetch) continue;
      out.add({fetch != 0, cache != 0});
    }
  }
  return out;
}

/// The two non-dominated actions per state. Dropping the dominated pairs is
/// exact: a dominated action pays a fetch price without changing the next
/// cache state (prices are nonnegative). Eight state-action pairs total.
constexpr ActionSet reduced_actions(SlotState s) {
  ActionSet out;
  if (s.cached) {
    out.add({false, false});
    out.add({false, true});
  } else if (s.request) {
    out.add({true, false});
    out.add({true, true});
  } else {
    out.add({false, false});
    out.add({true, true});
  }
  return out;
}

/// Cost of taking an action at the given prices: store_price per caching
/// decision plus fetch_price per fetching decision.
constexpr double instantaneous_cost(ActionPair a, const PriceSample& p) {
  return p.store_price * (a.cache ? 1.0 : 0.0) + p.fetch_price * (a.fetch ? 1.0 : 0.0);
}

/// Optimal one-slot decision given the marginal future saving of caching.
/// Threshold rules per state (request, cached), ties resolve to caching:
///   (0,0): fetch = cache = [saving >= fetch + store]
///   (0,1): fetch = 0, cache = [saving >= store]
///   (1,0): fetch = 1, cache = [saving >= store]
///   (1,1): fetch = 0, cache = [saving >= store]
/// The result is always inside reduced_actions(state).
constexpr ActionPair bellman_decide(SlotState s, const PriceSample& p, MarginalFutureCost saving) {
  if (!s.cached) {
    if (s.request) return {true, saving.value >= p.store_price};
    const bool prefetch = saving.value >= p.fetch_price + p.store_price;
    return {prefetch, prefetch};
  }
  return {false, saving.value >= p.store_price};
}

// Dense indexing of the binary state/action space, used by the tabular
// solvers and learners.
constexpr int state_index(SlotState s) {
  return (s.request ? 2 : 0) + (s.cached ? 1 : 0);
}

constexpr int action_index(ActionPair a) {
  return (a.fetch ? 2 : 0) + (a.cache ? 1 : 0);
}

constexpr int factor_index(SlotState s, ActionPair a) {
  return state_index(s) * 4 + action_index(a);
}

constexpr SlotState state_from_index(int i) {
  return {(i & 2) != 0, (i & 1) != 0};
}

constexpr ActionPair action_from_index(int i) {
  return {(i & 2) != 0, (i & 1) != 0};
}

}  // namespace edgecache
