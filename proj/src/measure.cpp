#include "suffstat/measure.hpp"

#include <algorithm>
#include <cmath>

namespace suffstat {

namespace {
constexpr double kMinWeight = 1e-300;  // below this, density ratios underflow
}

SampleSpace::SampleSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ConfigError("sample space must have at least one outcome");
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    auto [it, inserted] = index_.emplace(labels_[i], i);
    if (!inserted) throw ConfigError("duplicate outcome label '" + labels_[i] + "'");
  }
}

std::optional<std::size_t> SampleSpace::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SampleSpace::index_of(std::string_view label) const {
  auto idx = find(label);
  if (!idx) throw ConfigError("unknown outcome label '" + std::string(label) + "'");
  return *idx;
}

bool SampleSpace::same_as(const SampleSpace& other) const {
  if (this == &other) return true;
  return labels_ == other.labels_;
}

SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const SampleSpace>(std::move(labels));
}

SpacePtr product_space_bits(std::size_t nbits) {
  if (nbits == 0) throw ConfigError("product space needs at least one bit");
  if (nbits > 24)
    throw ResourceError("product space with " + std::to_string(nbits) +
                        " bits exceeds the 24-bit enumeration cap");
  const std::size_t n = std::size_t{1} << nbits;
  std::vector<std::string> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::string s(nbits, '0');
    for (std::size_t b = 0; b < nbits; ++b)
      if (v & (std::size_t{1} << (nbits - 1 - b))) s[b] = '1';
    labels[v] = std::move(s);
  }
  return make_space(std::move(labels));
}

FiniteMeasure::FiniteMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw ConfigError("measure needs a sample space");
  if (weights_.size() != space_->size())
    throw ConfigError("measure has " + std::to_string(weights_.size()) +
                      " weights for " + std::to_string(space_->size()) + " outcomes");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < kMinWeight)
      throw ConfigError("weight of outcome '" + space_->label(i) +
                        "' must be finite and >= 1e-300");
  }
}

double FiniteMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

FiniteMeasure counting_measure(SpacePtr space) {
  std::vector<double> w(space->size(), 1.0);
  return FiniteMeasure(std::move(space), std::move(w));
}

Statistic::Statistic(SpacePtr source, SpacePtr target, std::vector<std::uint32_t> map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
  if (!source_ || !target_) throw ConfigError("statistic needs source and target spaces");
  if (map_.size() != source_->size())
    throw ConfigError("statistic map covers " + std::to_string(map_.size()) +
                      " of " + std::to_string(source_->size()) + " source outcomes");
  fibers_.resize(target_->size());
  for (std::size_t i = 0; i < map_.size(); ++i) {
    if (map_[i] >= target_->size())
      throw ConfigError("statistic maps '" + source_->label(i) +
                        "' outside the target space");
    fibers_[map_[i]].push_back(i);
  }
  for (std::size_t j = 0; j < fibers_.size(); ++j) {
    if (fibers_[j].empty())
      throw ConfigError("statistic is not surjective: target outcome '" +
                        target_->label(j) + "' has empty preimage");
  }
}

Statistic Statistic::from_labels(SpacePtr source, SpacePtr target,
                                 const std::vector<std::string>& image_labels) {
  if (image_labels.size() != source->size())
    throw ConfigError("image list covers " + std::to_string(image_labels.size()) +
                      " of " + std::to_string(source->size()) + " source outcomes");
  std::vector<std::uint32_t> map(source->size());
  for (std::size_t i = 0; i < image_labels.size(); ++i)
    map[i] = static_cast<std::uint32_t>(target->index_of(image_labels[i]));
  return Statistic(std::move(source), std::move(target), std::move(map));
}

const std::string& Statistic::apply_label(std::string_view source_label) const {
  return target_->label(map_[source_->index_of(source_label)]);
}

const std::vector<std::size_t>& Statistic::fiber_indices(std::size_t target_index) const {
  if (target_index >= target_->size())
    throw ConfigError("fiber of out-of-range target index");
  return fibers_[target_index];
}

FiniteMeasure pushforward_measure(const FiniteMeasure& mu, const Statistic& kappa) {
  if (!mu.space().same_as(kappa.source()))
    throw ConfigError("pushforward: measure space does not match statistic source");
  std::vector<double> w(kappa.target().size(), 0.0);
  // Fiber-ordered summation keeps results reproducible.
  for (std::size_t j = 0; j < kappa.target().size(); ++j)
    for (std::size_t i : kappa.fiber_indices(j)) w[j] += mu.weight(i);
  return FiniteMeasure(kappa.target_ptr(), std::move(w));
}

std::vector<std::string> fiber(const Statistic& kappa, std::string_view target_label) {
  const std::size_t j = kappa.target().index_of(target_label);
  std::vector<std::string> out;
  out.reserve(kappa.fiber_indices(j).size());
  for (std::size_t i : kappa.fiber_indices(j)) out.push_back(kappa.source().label(i));
  return out;
}

Statistic compose(const Statistic& outer, const Statistic& inner) {
  if (!inner.target().same_as(outer.source()))
    throw ConfigError("compose: inner target does not match outer source");
  std::vector<std::uint32_t> map(inner.source().size());
  for (std::size_t i = 0; i < map.size(); ++i)
    map[i] = static_cast<std::uint32_t>(outer.apply(inner.apply(i)));
  return Statistic(inner.source_ptr(), outer.target_ptr(), std::move(map));
}

Statistic identity_statistic(SpacePtr space) {
  std::vector<std::uint32_t> map(space->size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<std::uint32_t>(i);
  return Statistic(space, space, std::move(map));
}

Statistic constant_statistic(SpacePtr space, std::string target_label) {
  auto target = make_space({std::move(target_label)});
  std::vector<std::uint32_t> map(space->size(), 0);
  return Statistic(std::move(space), std::move(target), std::move(map));
}

Statistic bit_sum_statistic(SpacePtr space) {
  std::size_t max_sum = 0;
  std::vector<std::size_t> sums(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) {
    std::size_t s = 0;
    for (char c : space->label(i)) {
      if (c == '1') {
        ++s;
      } else if (c != '0') {
        throw ConfigError("bit-sum statistic needs 0/1 labels, got '" +
                          space->label(i) + "'");
      }
    }
    sums[i] = s;
    max_sum = std::max(max_sum, s);
  }
  std::vector<std::string> target_labels;
  target_labels.reserve(max_sum + 1);
  for (std::size_t s = 0; s <= max_sum; ++s) target_labels.push_back(std::to_string(s));
  auto target = make_space(std::move(target_labels));
  std::vector<std::uint32_t> map(space->size());
  for (std::size_t i = 0; i < map.size(); ++i)
    map[i] = static_cast<std::uint32_t>(sums[i]);
  return Statistic(std::move(space), std::move(target), std::move(map));
}

}  // namespace suffstat
