#include "edgecache/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace edgecache::env {

PriceModel::PriceModel(std::vector<Atom> support) : support_(std::move(support)) {
  if (support_.empty()) throw std::invalid_argument("price model: empty support");
  double total = 0.0;
  mean_ = 0.0;
  max_value_ = 0.0;
  for (const Atom& atom : support_) {
    if (atom.value < 0.0) throw std::invalid_argument("price model: negative support value");
    if (atom.probability < 0.0) throw std::invalid_argument("price model: negative probability");
    total += atom.probability;
    mean_ += atom.value * atom.probability;
    max_value_ = std::max(max_value_, atom.value);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("price model: probabilities sum to " + std::to_string(total));
}

PriceModel two_point_model(double mean, double spread) {
  if (spread < 0.0) throw std::invalid_argument("two_point_model: negative spread");
  if (mean < spread)
    throw std::invalid_argument("two_point_model: mean < spread would yield a negative price");
  if (spread == 0.0) return PriceModel({{mean, 1.0}});
  return PriceModel({{mean - spread, 0.5}, {mean + spread, 0.5}});
}

PriceModel symmetric_support_model(double mean, double half_width, int points) {
  if (points < 1) throw std::invalid_argument("symmetric_support_model: points < 1");
  if (half_width < 0.0) throw std::invalid_argument("symmetric_support_model: negative width");
  if (mean < half_width)
    throw std::invalid_argument("symmetric_support_model: support reaches below zero");
  if (points == 1 || half_width == 0.0) return PriceModel({{mean, 1.0}});
  std::vector<PriceModel::Atom> atoms;
  atoms.reserve(points);
  const double prob = 1.0 / points;
  for (int i = 0; i < points; ++i) {
    const double offset = -half_width + 2.0 * half_width * i / (points - 1);
    atoms.push_back({mean + offset, prob});
  }
  return PriceModel(std::move(atoms));
}

double compose_affine_price(const AffinePriceDecomposition& d, double size) {
  const double price = size * (d.shared_per_bit + d.file_per_bit) + d.shared_const + d.file_const;
  if (price < 0.0) throw std::invalid_argument("compose_affine_price: negative price");
  return price;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = splitmix64(root ^ 0x5851f42d4c957f2dull);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

double RngStream::sample(const PriceModel& model) {
  const double u = uniform();
  double cum = 0.0;
  for (const PriceModel::Atom& atom : model.support()) {
    cum += atom.probability;
    if (u < cum) return atom.value;
  }
  return model.support().back().value;
}

SlotDraw sample_slot(const CatalogFile& file, RngStream& stream) {
  SlotDraw draw;
  draw.request = stream.bernoulli(file.popularity);
  draw.prices.store_price = stream.sample(file.store_prices);
  draw.prices.fetch_price = stream.sample(file.fetch_prices);
  return draw;
}

std::vector<CatalogFile> build_catalog(int count, std::pair<double, double> size_range,
                                       std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("build_catalog: count < 1");
  if (size_range.first <= 0.0 || size_range.first > size_range.second)
    throw std::invalid_argument("build_catalog: invalid size range");
  RngStream stream(derive_seed(seed, kStreamCatalog));
  std::vector<CatalogFile> files(count);
  for (int f = 0; f < count; ++f) {
    files[f].id = f;
    files[f].size = stream.uniform_in(size_range.first, size_range.second);
  }
  return files;
}

double PopularitySpec::resolve(RngStream& stream) const {
  if (kind == Kind::fixed) return value;
  return stream.uniform_in(low, high);
}

void PopularitySpec::validate() const {
  if (kind == Kind::fixed) {
    if (value < 0.0 || value > 1.0)
      throw std::invalid_argument("popularity: value out of [0,1]");
  } else {
    if (low < 0.0 || high > 1.0 || low > high)
      throw std::invalid_argument("popularity: range out of [0,1]");
  }
}

PriceModel PriceSpec::build() const {
  if (points == 2) return two_point_model(mean, effective_spread());
  return symmetric_support_model(mean, effective_spread(), points);
}

int ScenarioSchedule::total_length() const {
  int total = 0;
  for (const BlockSpec& b : blocks) total += b.length;
  return total;
}

void ScenarioSchedule::validate(int horizon) const {
  if (blocks.empty()) throw std::invalid_argument("schedule: no blocks");
  for (const BlockSpec& b : blocks) {
    if (b.length < 1) throw std::invalid_argument("schedule: block length < 1");
    b.popularity.validate();
  }
  if (total_length() != horizon)
    throw std::invalid_argument("schedule: block lengths do not cover the horizon");
}

int ScenarioSchedule::block_at(int slot) const {
  int start = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    start += blocks[i].length;
    if (slot < start) return static_cast<int>(i);
  }
  return static_cast<int>(blocks.size()) - 1;
}

}  // namespace edgecache::env
