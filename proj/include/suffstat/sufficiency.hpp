#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "suffstat/fisher.hpp"
#include "suffstat/model.hpp"

namespace suffstat {

inline constexpr std::uint64_t kDefaultSeed = 991;

// Smallest generalized eigenvalue lambda with G' v = lambda G v, via
// Cholesky reduction of G. Requires G positive definite on the grid
// (lambda_min(G) > 1e-12 trace(G)); near-singular G gets a PSD jitter of
// 1e-12 trace(G) before factoring. Eigenvalues indistinguishable from zero
// (below 1e-12 trace of the reduced matrix) are clamped to zero.
double min_ratio(const MetricMatrix& g, const MetricMatrix& gp);

// lambda_min of L^-1 A L^-T for a precomputed Cholesky factor L, with the
// same zero clamp min_ratio applies. Shared with the partition search, which
// factors G once per grid point.
double reduced_min_eigenvalue(const SmallMatrix& chol_lower, const SmallMatrix& a);

// Per-point generalized eigenvalue curve and its infimum over the grid.
// delta_hat = sqrt(delta_sq_hat); points appended by refinement rounds are
// included in the stored curve.
struct DeltaReport {
  Convention convention = Convention::weighted;
  double eps = 1e-4;
  std::size_t base_grid_size = 0;
  int refine_rounds = 2;
  std::vector<std::vector<double>> points;
  std::vector<double> lambda_min;
  std::vector<double> g_det;
  std::vector<double> gp_det;
  double delta_sq_hat = 0.0;
  double delta_hat = 0.0;
  std::vector<double> argmin;
  std::size_t argmin_index = 0;
  bool boundary_infimum = false;
};

// Produces (G, G') at a parameter point. Must be pure and thread-safe.
using MetricPairFn =
    std::function<std::pair<MetricMatrix, MetricMatrix>(std::span<const double>)>;

// Grid sweep plus local refinement around the argmin: golden-section in one
// dimension, shrinking neighborhood sub-lattices otherwise.
DeltaReport estimate_delta_scan(const MetricPairFn& eval, const Grid& grid,
                                Convention convention, int refine_rounds = 2,
                                bool simplex_constraint = false);

DeltaReport estimate_delta(const ParametrizedModel& model, const Statistic& kappa,
                           const Grid& grid, Convention convention,
                           int refine_rounds = 2);

MetricPairFn model_pair_evaluator(const ParametrizedModel& model, const Statistic& kappa,
                                  Convention convention);

// | ||phi - kappa*phi'||^2 - (||phi||^2 - ||kappa*phi'||^2) | in
// L2(Omega, p(xi) mu0), phi = directional log-derivative. The identity is the
// conditional-expectation orthogonality, so the weighted measure is fixed.
struct PythagorasCheck {
  double residual = 0.0;
  double phi_norm_sq = 0.0;
};

PythagorasCheck pythagoras_check(const ParametrizedModel& model, const Statistic& kappa,
                                 std::span<const double> xi, std::span<const double> v);

double pythagoras_residual(const ParametrizedModel& model, const Statistic& kappa,
                           std::span<const double> xi, std::span<const double> v);

// Derivative-bound check: for every grid point and direction,
// margin = sqrt(1-delta^2) ||d_v log p|| - ||d_v log(p / kappa*p')||.
struct ConditionIIReport {
  Convention convention = Convention::weighted;
  double delta = 1.0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t random_directions = 8;
  double min_margin = 0.0;
  double min_margin_rel = 0.0;  // margin / ||d_v log p|| at the minimizer
  std::vector<double> worst_point;
  std::vector<double> worst_direction;
  bool holds = true;  // min_margin_rel >= -1e-9
};

ConditionIIReport check_condition_ii(const ParametrizedModel& model,
                                     const Statistic& kappa, const Grid& grid,
                                     double delta, Convention convention,
                                     std::uint64_t seed = kDefaultSeed,
                                     std::size_t random_directions = 8);

// Distance induced by the Fisher form. One-dimensional models use adaptive
// quadrature of sqrt(g) (relative tolerance 1e-8); higher dimensions use a
// shortest path on a lattice graph whose edges are metric segment lengths
// (O(h) bias, h the lattice step).
double riemannian_distance(const ParametrizedModel& model, std::span<const double> xi0,
                           std::span<const double> xi1, Convention convention,
                           std::size_t grid_res = 64);

struct DistanceTable {
  std::vector<std::vector<double>> points;
  std::vector<double> values;  // row-major k x k
  std::string method;

  double at(std::size_t i, std::size_t j) const { return values[i * points.size() + j]; }
};

DistanceTable distance_table(const ParametrizedModel& model,
                             std::vector<std::vector<double>> points,
                             Convention convention, std::size_t grid_res = 64);

// Difference-quotient estimate of the local Lipschitz constant of
// xi -> log(p/kappa*p') into L2: max over adjacent grid pairs of
// ||delta log t|| / (segment length under the Fisher metric). Inner products
// follow the convention (mu0, or p at the segment midpoint times mu0).
struct LipschitzReport {
  double estimate = 0.0;
  std::size_t argmax_a = 0;
  std::size_t argmax_b = 0;
};

LipschitzReport lipschitz_estimate(const ParametrizedModel& model, const Statistic& kappa,
                                   const Grid& grid, Convention convention);

// p(w;xi) = s(kappa(w);xi) * t(w;xi) with t positive.
struct Factorization {
  std::function<double(std::size_t, std::span<const double>)> s;  // target index
  std::function<double(std::size_t, std::span<const double>)> t;  // source index
  std::string s_desc;
  std::string t_desc;
};

// s = p', t = p / (p' o kappa); reconstruction holds by construction.
Factorization canonical_factorization(const ParametrizedModel& model,
                                      const Statistic& kappa);

// Verifies a factorization:
//  (a) reconstruction p = (s o kappa) t on the grid (1e-9 relative; failure
//      throws FactorizationError naming the worst outcome and point),
//  (b) Lipschitz estimate of xi -> log t bounded by sqrt(1-delta^2) + 1e-6,
//  (c) the pushforward chain
//      ||delta log(p/kappa*p')||^2 = ||delta log t||^2 - ||kappa*(delta log t')||^2
//      with t' the density of kappa_*(t mu0); residual is reported relative
//      to ||delta log p||^2 and flagged against 1e-9.
struct ConditionIVReport {
  double delta = 1.0;
  Convention convention = Convention::weighted;
  double worst_reconstruction_rel = 0.0;
  double lipschitz_estimate = 0.0;
  double lipschitz_bound = 0.0;
  bool lipschitz_ok = true;
  double chain_residual_max = 0.0;
  bool chain_ok = true;
  bool holds = true;
};

ConditionIVReport check_condition_iv(const ParametrizedModel& model,
                                     const Statistic& kappa, const Factorization& f,
                                     const Grid& grid, double delta,
                                     Convention convention);

}  // namespace suffstat
