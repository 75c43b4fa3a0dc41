#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suffstat/sufficiency.hpp"

namespace suffstat {

struct MergeStep {
  std::string label_a;  // smallest label of each merged block
  std::string label_b;
  double delta_hat_after = 0.0;
};

struct CoarseningResult {
  Statistic statistic;
  DeltaReport report;  // fixed-grid sweep, no refinement
  std::vector<MergeStep> trace;
};

// Starts from the identity partition and repeatedly merges the block pair
// whose merge keeps delta_hat largest (ties: lexicographically smallest pair
// of block labels) until `target_size` blocks remain.
CoarseningResult greedy_coarsen(const ParametrizedModel& model, std::size_t target_size,
                                const Grid& grid, Convention convention);

// Scans every partition of the sample space into exactly `target_size`
// blocks (|Omega| <= 10) and returns the delta_hat-maximal one; ties go to
// the lexicographically smallest canonical encoding.
CoarseningResult exhaustive_coarsen(const ParametrizedModel& model,
                                    std::size_t target_size, const Grid& grid,
                                    Convention convention);

// Statistic induced by a partition given as block index per outcome. Target
// outcomes are labeled by each block's lexicographically smallest member and
// ordered by that label.
Statistic partition_statistic(SpacePtr source, const std::vector<std::uint32_t>& block_of);

}  // namespace suffstat
