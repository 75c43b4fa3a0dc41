#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "suffstat/errors.hpp"

namespace suffstat {

// Finite labeled outcome set. Labels are unique and keep their given order;
// all sums over outcomes run in this order.
class SampleSpace {
 public:
  explicit SampleSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> find(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;  // throws ConfigError

  bool same_as(const SampleSpace& other) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string_view, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

SpacePtr make_space(std::vector<std::string> labels);

// All binary strings of length nbits, in numeric order ("00","01","10","11").
SpacePtr product_space_bits(std::size_t nbits);

// Strictly positive weights on every outcome of a sample space.
class FiniteMeasure {
 public:
  FiniteMeasure(SpacePtr space, std::vector<double> weights);

  const SampleSpace& space() const { return *space_; }
  SpacePtr space_ptr() const { return space_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double total_mass() const;

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

FiniteMeasure counting_measure(SpacePtr space);

// Surjective total map between two sample spaces.
class Statistic {
 public:
  Statistic(SpacePtr source, SpacePtr target, std::vector<std::uint32_t> map);

  // Builds the map from source/target labels.
  static Statistic from_labels(SpacePtr source, SpacePtr target,
                               const std::vector<std::string>& image_labels);

  const SampleSpace& source() const { return *source_; }
  const SampleSpace& target() const { return *target_; }
  SpacePtr source_ptr() const { return source_; }
  SpacePtr target_ptr() const { return target_; }

  std::size_t apply(std::size_t source_index) const { return map_[source_index]; }
  const std::string& apply_label(std::string_view source_label) const;

  // Preimage indices of one target outcome, in source order.
  const std::vector<std::size_t>& fiber_indices(std::size_t target_index) const;

 private:
  SpacePtr source_;
  SpacePtr target_;
  std::vector<std::uint32_t> map_;
  std::vector<std::vector<std::size_t>> fibers_;
};

// weight(w') = sum of weights over the fiber of w'; total mass preserved.
FiniteMeasure pushforward_measure(const FiniteMeasure& mu, const Statistic& kappa);

// Source labels mapping to `target_label`, in source order.
std::vector<std::string> fiber(const Statistic& kappa, std::string_view target_label);

// outer(inner(.)): requires inner.target = outer.source.
Statistic compose(const Statistic& outer, const Statistic& inner);

Statistic identity_statistic(SpacePtr space);
Statistic constant_statistic(SpacePtr space, std::string target_label = "*");

// Maps a 0/1-string label to the decimal count of its '1' characters.
Statistic bit_sum_statistic(SpacePtr space);

}  // namespace suffstat
