#include "edgecache/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "edgecache/planning.hpp"

namespace edgecache::sim {

namespace {

struct Proposal {
  ActionPair action;
  double score = 0.0;  // selection score of the chosen action (projection key)
};

// Engines cover the policies that do not learn marginalized factors; the
// Q-based policies run through pricing::mq_learning_step instead.
class PolicyEngine {
 public:
  virtual ~PolicyEngine() = default;
  virtual void block_start(const std::vector<planning::FileModel>& models) {}
  virtual Proposal propose(int file, SlotState state, const PriceSample& prices,
                           double discount) = 0;
  virtual void commit(int file, SlotState state, ActionPair executed,
                      const PriceSample& prices, double discount) {}
};

// Threshold policy from per-file value tables recomputed at each block start
// with the block-true distributions: the converged tables for the stationary
// optimum, or the h-horizon lookahead tables.
class PlannedEngine : public PolicyEngine {
 public:
  PlannedEngine(bool optimal, int horizon_h) : optimal_(optimal), horizon_h_(horizon_h) {}

  void block_start(const std::vector<planning::FileModel>& models) override {
    tables_.resize(models.size());
    for (std::size_t f = 0; f < models.size(); ++f) {
      if (optimal_) {
        tables_[f] = planning::value_iteration(models[f], 1e-10);
      } else if (horizon_h_ == 0) {
        tables_[f] = ValueTable{0.0, 0.0};  // zero lookahead
      } else {
        tables_[f] = planning::finite_horizon_values(models[f], horizon_h_ - 1);
      }
    }
  }

  Proposal propose(int file, SlotState state, const PriceSample& prices,
                   double discount) override {
    const ValueTable& v = tables_[file];
    const ActionPair action = bellman_decide(state, prices, marginal_future_cost(v, discount));
    const double continuation = action.cache ? v.cached : v.uncached;
    return {action, instantaneous_cost(action, prices) + discount * continuation};
  }

 private:
  bool optimal_;
  int horizon_h_;
  std::vector<ValueTable> tables_;
};

class MyopicEngine : public PolicyEngine {
 public:
  Proposal propose(int, SlotState state, const PriceSample& prices, double) override {
    const ActionPair action = myopic_policy(state, prices);
    return {action, instantaneous_cost(action, prices)};
  }
};

class ValueEstimateEngine : public PolicyEngine {
 public:
  ValueEstimateEngine(int files, double stepsize) : estimates_(files) {
    for (auto& e : estimates_) e.stepsize = stepsize;
  }

  Proposal propose(int file, SlotState state, const PriceSample& prices,
                   double discount) override {
    const auto& e = estimates_[file];
    const MarginalFutureCost saving{discount * (e.uncached_hat - e.cached_hat)};
    const ActionPair action = bellman_decide(state, prices, saving);
    const double continuation = action.cache ? e.cached_hat : e.uncached_hat;
    return {action, instantaneous_cost(action, prices) + discount * continuation};
  }

  void commit(int file, SlotState state, ActionPair executed, const PriceSample& prices,
              double discount) override {
    auto& e = estimates_[file];
    const double continuation = executed.cache ? e.cached_hat : e.uncached_hat;
    const double target = instantaneous_cost(executed, prices) + discount * continuation;
    double& entry = state.cached ? e.cached_hat : e.uncached_hat;
    entry = (1.0 - e.stepsize) * entry + e.stepsize * target;
  }

 private:
  std::vector<learning::ValueEstimate> estimates_;
};

}  // namespace

void Scenario::validate(int horizon) const {
  if (catalog.empty()) throw std::invalid_argument("scenario: empty catalog");
  for (const auto& file : catalog)
    if (!(file.size > 0.0)) throw std::invalid_argument("scenario: file size must be > 0");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("scenario: discount must lie in (0, 1)");
  schedule.validate(horizon);
  capacity.validate();
}

void PolicySpec::validate() const {
  if (kind == Kind::finite_horizon && horizon_h < 0)
    throw std::invalid_argument("policy: lookahead horizon must be >= 0");
  if (kind == Kind::stochastic_value || kind == Kind::q_learning || kind == Kind::mq_learning) {
    if (!(stepsize > 0.0 && stepsize < 1.0))
      throw std::invalid_argument("policy: stepsize must lie in (0, 1)");
  }
  if (kind == Kind::q_learning || kind == Kind::mq_learning) {
    if (exploration.kind == learning::ExplorationSchedule::Kind::constant &&
        !(exploration.epsilon >= 0.0 && exploration.epsilon <= 1.0))
      throw std::invalid_argument("policy: epsilon must lie in [0, 1]");
  }
}

PolicySpec PolicySpec::optimal() { return {}; }

PolicySpec PolicySpec::finite_horizon(int h) {
  PolicySpec spec;
  spec.kind = Kind::finite_horizon;
  spec.horizon_h = h;
  return spec;
}

PolicySpec PolicySpec::myopic() {
  PolicySpec spec;
  spec.kind = Kind::myopic;
  return spec;
}

PolicySpec PolicySpec::stochastic_value(double stepsize) {
  PolicySpec spec;
  spec.kind = Kind::stochastic_value;
  spec.stepsize = stepsize;
  return spec;
}

PolicySpec PolicySpec::q_learning(double stepsize, learning::ExplorationSchedule eps) {
  PolicySpec spec;
  spec.kind = Kind::q_learning;
  spec.stepsize = stepsize;
  spec.exploration = eps;
  return spec;
}

PolicySpec PolicySpec::mq_learning(double stepsize, learning::ExplorationSchedule eps) {
  PolicySpec spec = q_learning(stepsize, eps);
  spec.kind = Kind::mq_learning;
  return spec;
}

void TrajectoryRecord::validate() const {
  for (int t = 0; t < slots; ++t) {
    for (int f = 0; f < files; ++f) {
      const SlotState state = state_at(t, f);
      const ActionPair action = action_at(t, f);
      if (!feasible_actions(state).contains(action))
        throw std::logic_error("trajectory: infeasible recorded action");
      if (t + 1 < slots && cached[index(t + 1, f)] != cache[index(t, f)])
        throw std::logic_error("trajectory: cache recursion violated");
    }
  }
}

ActionPair myopic_policy(SlotState s, const PriceSample& prices) {
  const bool fetch = s.request && !s.cached;
  const bool available = fetch || s.cached;
  const bool cache = available && prices.fetch_price > prices.store_price;
  return {fetch, cache};
}

TrajectoryRecord run_trajectory(const Scenario& scenario, const PolicySpec& policy, int horizon,
                                std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("run_trajectory: horizon must be >= 1");
  scenario.validate(horizon);
  policy.validate();

  const int files = static_cast<int>(scenario.catalog.size());
  const double discount = scenario.discount;
  const bool learner = policy.kind == PolicySpec::Kind::q_learning ||
                       policy.kind == PolicySpec::Kind::mq_learning;
  // Dual pricing and the hard-capacity projection belong to the
  // capacity-aware learner; baseline policies get the projection only, so
  // comparisons against them run under the same hard budget.
  const pricing::CapacityConfig learner_config =
      policy.kind == PolicySpec::Kind::mq_learning ? scenario.capacity
                                                   : pricing::CapacityConfig{};
  const bool project_baseline = !learner && scenario.capacity.enforce_hard;

  std::vector<learning::QAgent> agents;
  std::unique_ptr<PolicyEngine> engine;
  if (learner) {
    agents.assign(files, learning::QAgent(discount, policy.stepsize, policy.bootstrap));
  } else {
    switch (policy.kind) {
      case PolicySpec::Kind::optimal_stationary:
        engine = std::make_unique<PlannedEngine>(true, 0);
        break;
      case PolicySpec::Kind::finite_horizon:
        engine = std::make_unique<PlannedEngine>(false, policy.horizon_h);
        break;
      case PolicySpec::Kind::myopic:
        engine = std::make_unique<MyopicEngine>();
        break;
      case PolicySpec::Kind::stochastic_value:
        engine = std::make_unique<ValueEstimateEngine>(files, policy.stepsize);
        break;
      default:
        throw std::logic_error("run_trajectory: unhandled policy kind");
    }
  }

  std::vector<env::RngStream> env_streams;
  std::vector<env::RngStream> explore_streams;
  env_streams.reserve(files);
  explore_streams.reserve(files);
  for (int f = 0; f < files; ++f) {
    env_streams.emplace_back(env::derive_seed(seed, env::kStreamEnvironment, f));
    explore_streams.emplace_back(env::derive_seed(seed, env::kStreamExploration, f));
  }

  TrajectoryRecord record;
  record.files = files;
  record.slots = horizon;
  const std::size_t cells = static_cast<std::size_t>(files) * horizon;
  record.request.resize(cells);
  record.cached.resize(cells);
  record.fetch.resize(cells);
  record.cache.resize(cells);
  record.store_price.resize(cells);
  record.fetch_price.resize(cells);
  record.file_cost.resize(cells);
  record.slot_cost.resize(horizon);
  record.storage_multiplier.resize(horizon);
  record.backhaul_multiplier.resize(horizon);

  pricing::DualState duals;
  duals.stepsize = scenario.capacity.dual_stepsize;

  std::vector<env::CatalogFile> block_files = scenario.catalog;
  std::vector<double> sizes(files);
  for (int f = 0; f < files; ++f) sizes[f] = scenario.catalog[f].size;

  std::vector<std::uint8_t> cached_bits(files, 0);
  std::vector<SlotState> states(files);
  std::vector<PriceSample> prices(files);
  std::vector<env::SlotDraw> draws(files);

  int current_block = -1;
  for (int t = 0; t < horizon; ++t) {
    const int block_index = scenario.schedule.block_at(t);
    if (block_index != current_block) {
      const env::BlockSpec& block = scenario.schedule.blocks[block_index];
      std::vector<planning::FileModel> models;
      models.reserve(files);
      for (int f = 0; f < files; ++f) {
        env::RngStream pop_stream(
            env::derive_seed(seed, env::kStreamPopularity, block_index, f));
        block_files[f].popularity = block.popularity.resolve(pop_stream);
        block_files[f].store_prices = block.store.build();
        block_files[f].fetch_prices = block.fetch.build();
        if (engine)
          models.emplace_back(block_files[f].popularity, block_files[f].store_prices,
                              block_files[f].fetch_prices, discount);
      }
      if (engine) engine->block_start(models);
      current_block = block_index;
    }

    for (int f = 0; f < files; ++f) {
      draws[f] = env::sample_slot(block_files[f], env_streams[f]);
      states[f] = {draws[f].request, cached_bits[f] != 0};
      prices[f] = draws[f].prices;
    }
    if (learner)
      for (int f = 0; f < files; ++f) agents[f].observe_request(draws[f].request);

    const pricing::DualState slot_duals = duals;
    std::vector<ActionPair> executed(files);
    if (learner) {
      const double epsilon = policy.exploration.value(t + 1);
      const pricing::MqSlotResult result = pricing::mq_learning_step(
          agents, states, prices, sizes, duals, learner_config, epsilon, explore_streams);
      executed = result.actions;
    } else {
      std::vector<Proposal> proposals(files);
      for (int f = 0; f < files; ++f)
        proposals[f] = engine->propose(f, states[f], prices[f], discount);
      if (project_baseline) {
        std::vector<pricing::ProjectionCandidate> candidates(files);
        for (int f = 0; f < files; ++f)
          candidates[f] = {f, proposals[f].action, proposals[f].score, sizes[f], states[f]};
        const auto projected =
            pricing::project_c4(candidates, scenario.capacity.hard_capacity);
        for (int f = 0; f < files; ++f) executed[f] = projected[f].second;
      } else {
        for (int f = 0; f < files; ++f) executed[f] = proposals[f].action;
      }
      for (int f = 0; f < files; ++f)
        engine->commit(f, states[f], executed[f], prices[f], discount);
    }

    double slot_cost = 0.0;
    for (int f = 0; f < files; ++f) {
      const std::size_t i = record.index(t, f);
      const double cost = instantaneous_cost(executed[f], prices[f]);
      slot_cost += cost;
      record.request[i] = draws[f].request ? 1 : 0;
      record.cached[i] = cached_bits[f];
      record.fetch[i] = executed[f].fetch ? 1 : 0;
      record.cache[i] = executed[f].cache ? 1 : 0;
      record.store_price[i] = prices[f].store_price;
      record.fetch_price[i] = prices[f].fetch_price;
      record.file_cost[i] = cost;
      cached_bits[f] = executed[f].cache ? 1 : 0;
    }
    record.slot_cost[t] = slot_cost;
    record.storage_multiplier[t] = slot_duals.storage_multiplier;
    record.backhaul_multiplier[t] = slot_duals.backhaul_multiplier;
  }

  record.validate();
  return record;
}

EnsembleResult run_ensemble(const Scenario& scenario, const PolicySpec& policy, int replications,
                            int horizon, std::uint64_t seed) {
  if (replications < 1) throw std::invalid_argument("run_ensemble: replications must be >= 1");
  EnsembleResult result;
  result.replications = replications;
  result.mean_slot_cost.assign(horizon, 0.0);
  result.mean_storage_multiplier.assign(horizon, 0.0);
  result.mean_backhaul_multiplier.assign(horizon, 0.0);
  for (int rep = 0; rep < replications; ++rep) {
    const std::uint64_t rep_seed = env::derive_seed(seed, env::kStreamReplication, rep);
    const TrajectoryRecord record = run_trajectory(scenario, policy, horizon, rep_seed);
    for (int t = 0; t < horizon; ++t) {
      result.mean_slot_cost[t] += record.slot_cost[t];
      result.mean_storage_multiplier[t] += record.storage_multiplier[t];
      result.mean_backhaul_multiplier[t] += record.backhaul_multiplier[t];
    }
  }
  for (double& c : result.mean_slot_cost) c /= replications;
  for (double& c : result.mean_storage_multiplier) c /= replications;
  for (double& c : result.mean_backhaul_multiplier) c /= replications;
  return result;
}

double discounted_cost(const TrajectoryRecord& record, double discount) {
  double total = 0.0;
  double weight = 1.0;
  for (int t = 0; t < record.slots; ++t) {
    total += weight * record.slot_cost[t];
    weight *= discount;
  }
  return total;
}

std::optional<double> caching_ratio(const TrajectoryRecord& record,
                                    std::optional<SlotState> state_filter) {
  std::size_t total = 0;
  std::size_t positive = 0;
  for (int t = 0; t < record.slots; ++t) {
    for (int f = 0; f < record.files; ++f) {
      if (state_filter && !(record.state_at(t, f) == *state_filter)) continue;
      ++total;
      if (record.cache[record.index(t, f)]) ++positive;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(positive) / static_cast<double>(total);
}

}  // namespace edgecache::sim
