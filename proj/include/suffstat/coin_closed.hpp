#pragma once

#include "suffstat/sufficiency.hpp"

namespace suffstat {

// Statistics on the coin model with grouped evaluators: sums over outcome
// classes of equal density (heads count, or block pattern count) instead of
// the 2^(mn) outcomes. Exact for these statistics; used automatically for
// mn > 16 and cross-checked against explicit enumeration below that.
enum class CoinStatisticKind { identity, heads, block };

MetricPairFn coin_block_pair_evaluator(int m, int n, CoinStatisticKind kind,
                                       Convention convention);

// Grid over (eps, 1-eps) matching the explicit model's grid layout.
Grid coin_block_grid(std::size_t per_axis, double eps);

// Closed-form polynomial values of the unweighted quadratic forms:
//   g  = (A2 xi^2 - A2 xi + A0) / (xi (1-xi))^2
//   g' = (B2 xi^(2n) - B1 xi^n + B0) / (xi (1-xi^n))^2   (block statistic)
double coin_block_g_unweighted(int m, int n, double xi);
double coin_block_gp_unweighted(int m, int n, double xi);

// mn / (xi (1-xi)).
double coin_block_g_weighted(int m, int n, double xi);

}  // namespace suffstat
