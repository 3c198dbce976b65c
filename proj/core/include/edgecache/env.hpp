#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "edgecache/core.hpp"

namespace edgecache::env {

/// Finite-support price distribution. Probabilities must sum to one within
/// 1e-12 and every support value must be nonnegative.
class PriceModel {
 public:
  struct Atom {
    double value = 0.0;
    double probability = 1.0;
  };

  PriceModel() : PriceModel({{0.0, 1.0}}) {}
  explicit PriceModel(std::vector<Atom> support);

  const std::vector<Atom>& support() const { return support_; }
  double mean() const { return mean_; }
  double max_value() const { return max_value_; }

 private:
  std::vector<Atom> support_;
  double mean_ = 0.0;
  double max_value_ = 0.0;
};

/// Two values mean-spread and mean+spread, each with probability 1/2.
/// Rejects spread < 0 and mean < spread (negative prices).
PriceModel two_point_model(double mean, double spread);

/// Evenly spaced symmetric support of `points` equally likely values on
/// [mean - half_width, mean + half_width]. points == 1 collapses to a point
/// mass at `mean`.
PriceModel symmetric_support_model(double mean, double half_width, int points);

/// Additive price decomposition: a per-bit component scaled by file size
/// plus a flat component, each split into a shared and a file-specific term.
struct AffinePriceDecomposition {
  double shared_per_bit = 0.0;
  double file_per_bit = 0.0;
  double shared_const = 0.0;
  double file_const = 0.0;
};

/// size * (shared_per_bit + file_per_bit) + shared_const + file_const.
/// Rejects a negative result.
double compose_affine_price(const AffinePriceDecomposition& d, double size);

struct CatalogFile {
  int id = 0;
  double size = 1.0;          // > 0
  double popularity = 0.0;    // in [0, 1]
  PriceModel store_prices;
  PriceModel fetch_prices;
};

// ---------------------------------------------------------------------------
// Deterministic stream splitting.
//
// Every random quantity in the simulator is drawn from an mt19937_64 stream
// whose seed is derived from a root seed and up to three stream labels by
// chaining splitmix64 steps: seed -> mix(seed ^ label) for each label in
// order. Distinct label tuples give statistically independent streams, so
// files, replications, and purposes (environment draws, exploration,
// popularity resolution) never share state.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Stream labels used by the trajectory runner.
inline constexpr std::uint64_t kStreamEnvironment = 0x1;
inline constexpr std::uint64_t kStreamExploration = 0x2;
inline constexpr std::uint64_t kStreamPopularity = 0x3;
inline constexpr std::uint64_t kStreamReplication = 0x4;
inline constexpr std::uint64_t kStreamCatalog = 0x5;

/// Seeded random stream with samplers that do not depend on
/// implementation-defined standard-library distributions, so identical seeds
/// give identical sequences on any platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    const int k = static_cast<int>(uniform() * n);
    return k < n ? k : n - 1;
  }

  double uniform_in(double low, double high) {
    return low + uniform() * (high - low);
  }

  double sample(const PriceModel& model);

 private:
  std::mt19937_64 engine_;
};

struct SlotDraw {
  bool request = false;
  PriceSample prices;
};

/// One slot of randomness for a file: Bernoulli(popularity) request plus an
/// independent draw from each price model. Draw order is fixed (request,
/// store price, fetch price) so sequences are reproducible.
SlotDraw sample_slot(const CatalogFile& file, RngStream& stream);

/// `count` files with sizes i.i.d. uniform on [size_range.first,
/// size_range.second]; popularity and price models are left at their
/// defaults for the scenario to fill in.
std::vector<CatalogFile> build_catalog(int count, std::pair<double, double> size_range,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Block-structured scenario schedules.
// ---------------------------------------------------------------------------

/// Per-file popularity assignment for a block: either one fixed value for
/// every file or an i.i.d. uniform draw per file.
struct PopularitySpec {
  enum class Kind { fixed, uniform };
  Kind kind = Kind::fixed;
  double value = 0.5;     // fixed case
  double low = 0.0;       // uniform case
  double high = 1.0;

  double resolve(RngStream& stream) const;
  void validate() const;
};

/// Symmetric finite-support price specification. When `spread` is absent it
/// defaults to 10% of the mean.
struct PriceSpec {
  double mean = 1.0;
  std::optional<double> spread;
  int points = 2;

  double effective_spread() const { return spread.value_or(0.1 * mean); }
  PriceModel build() const;
};

struct BlockSpec {
  int length = 1;  // >= 1 slots
  PopularitySpec popularity;
  PriceSpec store;
  PriceSpec fetch;
};

/// Ordered blocks; total length must equal the simulation horizon.
struct ScenarioSchedule {
  std::vector<BlockSpec> blocks;

  int total_length() const;
  void validate(int horizon) const;
  /// Index of the block containing slot t (0-based).
  int block_at(int slot) const;
};

}  // namespace edgecache::env
