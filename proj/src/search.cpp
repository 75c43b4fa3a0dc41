#include "suffstat/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace suffstat {

namespace {

// Per-grid-point tables shared by every candidate partition: only fiber sums
// change between candidates.
struct PointCache {
  std::vector<double> p_mu;                 // p * mu0 per outcome
  std::vector<std::vector<double>> dp_mu;   // grad p * mu0 per outcome
  std::vector<double> grad_log_flat;        // grad log p, outcome-major
  SmallMatrix chol;                         // Cholesky factor of G
  double g_scalar = 0.0;                    // d == 1 shortcut
  double g_det = 0.0;
};

class PartitionDeltaEvaluator {
 public:
  PartitionDeltaEvaluator(const ParametrizedModel& model, const Grid& grid,
                          Convention convention)
      : model_(model), grid_(grid), convention_(convention), dim_(model.dim()) {
    const std::size_t n = model.space().size();
    mu_.resize(n);
    for (std::size_t w = 0; w < n; ++w) mu_[w] = model.base().weight(w);
    cache_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto derivs = log_derivative(model, grid.points[i]);
      PointCache& c = cache_[i];
      c.p_mu.resize(n);
      c.dp_mu.assign(n, std::vector<double>(dim_));
      c.grad_log_flat.resize(n * dim_);
      SmallMatrix g(dim_);
      for (std::size_t w = 0; w < n; ++w) {
        c.p_mu[w] = derivs[w].density * mu_[w];
        const double weight =
            convention == Convention::weighted ? c.p_mu[w] : mu_[w];
        for (std::size_t a = 0; a < dim_; ++a) {
          const double gl = derivs[w].grad_log[a];
          c.grad_log_flat[w * dim_ + a] = gl;
          c.dp_mu[w][a] = gl * c.p_mu[w];  // = (d_a p) * mu0
          for (std::size_t b = a; b < dim_; ++b)
            g.at(a, b) += weight * gl * derivs[w].grad_log[b];
        }
      }
      for (std::size_t a = 0; a < dim_; ++a)
        for (std::size_t b = a + 1; b < dim_; ++b) g.at(b, a) = g.at(a, b);
      c.g_det = determinant(g);
      if (dim_ == 1) {
        c.g_scalar = g.at(0, 0);
        if (!(c.g_scalar > 1e-300))
          throw DegenerateMetricError("metric is singular at xi = " +
                                      point_to_string(grid.points[i]));
      } else {
        const double tr = g.trace();
        const auto ev = sym_eigenvalues(g);
        if (!(ev.front() > 1e-12 * tr))
          throw DegenerateMetricError("metric has near-zero eigenvalue at xi = " +
                                      point_to_string(grid.points[i]));
        SmallMatrix l = g;
        if (ev.front() < 1e-10 * tr)
          for (std::size_t a = 0; a < dim_; ++a) l.at(a, a) += 1e-12 * tr;
        if (!cholesky_lower(l))
          throw DegenerateMetricError("Cholesky factorization failed at xi = " +
                                      point_to_string(grid.points[i]));
        c.chol = std::move(l);
      }
    }
  }

  // lambda_min(G', G) at one grid point for a candidate partition.
  double lambda_at(std::size_t point, const std::vector<std::uint32_t>& block_of,
                   std::uint32_t n_blocks, SmallMatrix* gp_out = nullptr) const {
    const PointCache& c = cache_[point];
    const std::size_t n = block_of.size();
    sum_dp_.assign(n_blocks * dim_, 0.0);
    sum_p_.assign(n_blocks, 0.0);
    sum_mu_.assign(n_blocks, 0.0);
    for (std::size_t w = 0; w < n; ++w) {
      const std::uint32_t blk = block_of[w];
      sum_p_[blk] += c.p_mu[w];
      sum_mu_[blk] += mu_[w];
      for (std::size_t a = 0; a < dim_; ++a) sum_dp_[blk * dim_ + a] += c.dp_mu[w][a];
    }
    SmallMatrix gp(dim_);
    for (std::uint32_t blk = 0; blk < n_blocks; ++blk) {
      const double sp = sum_p_[blk];
      const double weight =
          convention_ == Convention::weighted ? 1.0 / sp : sum_mu_[blk] / (sp * sp);
      for (std::size_t a = 0; a < dim_; ++a)
        for (std::size_t b = a; b < dim_; ++b)
          gp.at(a, b) += weight * sum_dp_[blk * dim_ + a] * sum_dp_[blk * dim_ + b];
    }
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a + 1; b < dim_; ++b) gp.at(b, a) = gp.at(a, b);
    if (gp_out) *gp_out = gp;
    if (dim_ == 1) return gp.at(0, 0) / c.g_scalar;
    return reduced_min_eigenvalue(c.chol, gp);
  }

  double delta_sq(const std::vector<std::uint32_t>& block_of,
                  std::uint32_t n_blocks) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i)
      best = std::min(best, lambda_at(i, block_of, n_blocks));
    return best;
  }

  DeltaReport full_report(const std::vector<std::uint32_t>& block_of,
                          std::uint32_t n_blocks) const {
    DeltaReport r;
    r.convention = convention_;
    r.eps = grid_.eps;
    r.base_grid_size = grid_.size();
    r.refine_rounds = 0;
    r.points = grid_.points;
    r.lambda_min.resize(grid_.size());
    r.g_det.resize(grid_.size());
    r.gp_det.resize(grid_.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      SmallMatrix gp;
      r.lambda_min[i] = lambda_at(i, block_of, n_blocks, &gp);
      r.g_det[i] = cache_[i].g_det;
      r.gp_det[i] = determinant(gp);
      if (r.lambda_min[i] < r.lambda_min[best]) best = i;
    }
    r.argmin_index = best;
    r.argmin = r.points[best];
    r.delta_sq_hat = r.lambda_min[best];
    r.delta_hat = std::sqrt(std::max(r.delta_sq_hat, 0.0));
    bool boundary = false;
    for (std::size_t a = 0; a < grid_.dim; ++a) {
      const double margin = 0.51 * grid_.axis_step(a);
      if (r.argmin[a] <= grid_.axis_values[a].front() + margin ||
          r.argmin[a] >= grid_.axis_values[a].back() - margin)
        boundary = true;
    }
    r.boundary_infimum = boundary;
    return r;
  }

 private:
  const ParametrizedModel& model_;
  const Grid& grid_;
  Convention convention_;
  std::size_t dim_;
  std::vector<double> mu_;
  std::vector<PointCache> cache_;
  mutable std::vector<double> sum_dp_, sum_p_, sum_mu_;
};

// Rank of each outcome under lexicographic label order; canonical partition
// comparisons work on ranks.
std::vector<std::uint32_t> label_ranks(const SampleSpace& space) {
  std::vector<std::size_t> order(space.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return space.label(a) < space.label(b);
  });
  std::vector<std::uint32_t> rank(space.size());
  for (std::size_t r = 0; r < order.size(); ++r)
    rank[order[r]] = static_cast<std::uint32_t>(r);
  return rank;
}

// Blocks as sorted rank lists, ordered by their smallest rank.
std::vector<std::vector<std::uint32_t>> canonical_blocks(
    const std::vector<std::uint32_t>& block_of, std::uint32_t n_blocks,
    const std::vector<std::uint32_t>& rank) {
  std::vector<std::vector<std::uint32_t>> blocks(n_blocks);
  for (std::size_t w = 0; w < block_of.size(); ++w)
    blocks[block_of[w]].push_back(rank[w]);
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return blocks;
}

std::vector<std::uint32_t> canonical_key(const std::vector<std::uint32_t>& block_of,
                                         std::uint32_t n_blocks,
                                         const std::vector<std::uint32_t>& rank) {
  auto blocks = canonical_blocks(block_of, n_blocks, rank);
  std::vector<std::uint32_t> key;
  for (const auto& b : blocks) {
    key.insert(key.end(), b.begin(), b.end());
    key.push_back(std::numeric_limits<std::uint32_t>::max());
  }
  return key;
}

CoarseningResult build_result(const ParametrizedModel& model,
                              const PartitionDeltaEvaluator& eval,
                              const std::vector<std::uint32_t>& block_of,
                              std::uint32_t n_blocks, std::vector<MergeStep> trace) {
  CoarseningResult res{partition_statistic(model.space_ptr(), block_of),
                       eval.full_report(block_of, n_blocks), std::move(trace)};
  return res;
}

}  // namespace

Statistic partition_statistic(SpacePtr source,
                              const std::vector<std::uint32_t>& block_of) {
  if (block_of.size() != source->size())
    throw ConfigError("partition covers " + std::to_string(block_of.size()) + " of " +
                      std::to_string(source->size()) + " outcomes");
  std::uint32_t n_blocks = 0;
  for (std::uint32_t b : block_of) n_blocks = std::max(n_blocks, b + 1);

  // Representative label: lexicographically smallest member of each block.
  std::vector<std::string> rep(n_blocks);
  std::vector<bool> seen(n_blocks, false);
  for (std::size_t w = 0; w < block_of.size(); ++w) {
    const std::string& l = source->label(w);
    auto& r = rep[block_of[w]];
    if (!seen[block_of[w]] || l < r) r = l;
    seen[block_of[w]] = true;
  }
  for (std::uint32_t b = 0; b < n_blocks; ++b)
    if (!seen[b]) throw ConfigError("partition has an empty block");

  std::vector<std::uint32_t> order(n_blocks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return rep[a] < rep[b]; });
  std::vector<std::uint32_t> position(n_blocks);
  std::vector<std::string> labels(n_blocks);
  for (std::uint32_t i = 0; i < n_blocks; ++i) {
    position[order[i]] = i;
    labels[i] = rep[order[i]];
  }
  std::vector<std::uint32_t> map(block_of.size());
  for (std::size_t w = 0; w < block_of.size(); ++w) map[w] = position[block_of[w]];
  return Statistic(std::move(source), make_space(std::move(labels)), std::move(map));
}

CoarseningResult greedy_coarsen(const ParametrizedModel& model, std::size_t target_size,
                                const Grid& grid, Convention convention) {
  const std::size_t n = model.space().size();
  if (target_size < 1 || target_size > n)
    throw ConfigError("coarsening target must be between 1 and |Omega|");
  PartitionDeltaEvaluator eval(model, grid, convention);
  const auto rank = label_ranks(model.space());

  std::vector<std::uint32_t> block_of(n);
  std::iota(block_of.begin(), block_of.end(), 0u);
  std::uint32_t n_blocks = static_cast<std::uint32_t>(n);
  std::vector<MergeStep> trace;

  while (n_blocks > target_size) {
    // Smallest member rank per block, for deterministic tie-breaking.
    std::vector<std::uint32_t> min_rank(n_blocks,
                                        std::numeric_limits<std::uint32_t>::max());
    for (std::size_t w = 0; w < n; ++w)
      min_rank[block_of[w]] = std::min(min_rank[block_of[w]], rank[w]);

    double best_delta_sq = -std::numeric_limits<double>::infinity();
    std::pair<std::uint32_t, std::uint32_t> best_pair{0, 0};
    std::pair<std::uint32_t, std::uint32_t> best_key{0, 0};
    std::vector<std::uint32_t> merged(n);
    for (std::uint32_t a = 0; a + 1 < n_blocks; ++a) {
      for (std::uint32_t b = a + 1; b < n_blocks; ++b) {
        for (std::size_t w = 0; w < n; ++w) {
          std::uint32_t blk = block_of[w];
          if (blk == b) blk = a;
          else if (blk > b) --blk;
          merged[w] = blk;
        }
        const double ds = eval.delta_sq(merged, n_blocks - 1);
        std::pair<std::uint32_t, std::uint32_t> key{
            std::min(min_rank[a], min_rank[b]), std::max(min_rank[a], min_rank[b])};
        if (ds > best_delta_sq || (ds == best_delta_sq && key < best_key)) {
          best_delta_sq = ds;
          best_pair = {a, b};
          best_key = key;
        }
      }
    }

    MergeStep step;
    {
      // Labels of the two merged blocks' smallest members.
      std::string la, lb;
      for (std::size_t w = 0; w < n; ++w) {
        if (block_of[w] == best_pair.first && rank[w] == min_rank[best_pair.first])
          la = model.space().label(w);
        if (block_of[w] == best_pair.second && rank[w] == min_rank[best_pair.second])
          lb = model.space().label(w);
      }
      if (lb < la) std::swap(la, lb);
      step.label_a = la;
      step.label_b = lb;
      step.delta_hat_after = std::sqrt(std::max(best_delta_sq, 0.0));
    }
    trace.push_back(std::move(step));

    for (std::size_t w = 0; w < n; ++w) {
      std::uint32_t blk = block_of[w];
      if (blk == best_pair.second) blk = best_pair.first;
      else if (blk > best_pair.second) --blk;
      block_of[w] = blk;
    }
    --n_blocks;
  }
  return build_result(model, eval, block_of, n_blocks, std::move(trace));
}

CoarseningResult exhaustive_coarsen(const ParametrizedModel& model,
                                    std::size_t target_size, const Grid& grid,
                                    Convention convention) {
  const std::size_t n = model.space().size();
  if (n > 10)
    throw ResourceError("exhaustive coarsening capped at |Omega| <= 10, got " +
                        std::to_string(n));
  if (target_size < 1 || target_size > n)
    throw ConfigError("coarsening target must be between 1 and |Omega|");
  PartitionDeltaEvaluator eval(model, grid, convention);
  const auto rank = label_ranks(model.space());

  std::vector<std::uint32_t> rgs(n, 0);  // restricted growth string
  std::vector<std::uint32_t> best_partition;
  double best_delta_sq = -std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> best_key;

  const std::uint32_t target = static_cast<std::uint32_t>(target_size);
  auto consider = [&]() {
    const double ds = eval.delta_sq(rgs, target);
    if (ds > best_delta_sq) {
      best_delta_sq = ds;
      best_partition = rgs;
      best_key = canonical_key(rgs, target, rank);
    } else if (ds == best_delta_sq) {
      auto key = canonical_key(rgs, target, rank);
      if (key < best_key) {
        best_partition = rgs;
        best_key = std::move(key);
      }
    }
  };
  // Depth-first over restricted growth strings, pruned to exactly `target`
  // blocks.
  std::function<void(std::size_t, std::uint32_t)> recurse =
      [&](std::size_t i, std::uint32_t blocks_so_far) {
        if (i == n) {
          if (blocks_so_far == target) consider();
          return;
        }
        if (blocks_so_far + (n - i) < target) return;  // cannot reach target
        const std::uint32_t limit =
            std::min(blocks_so_far, target - 1);  // may reuse or open one block
        for (std::uint32_t b = 0; b <= limit; ++b) {
          rgs[i] = b;
          recurse(i + 1, std::max(blocks_so_far, b + 1));
        }
      };
  rgs[0] = 0;
  recurse(1, 1);

  if (best_partition.empty())
    throw NumericError("partition enumeration found no candidate");
  const std::uint32_t blocks = *std::max_element(best_partition.begin(),
                                                 best_partition.end()) + 1;
  return build_result(model, eval, best_partition, blocks, {});
}

}  // namespace suffstat
