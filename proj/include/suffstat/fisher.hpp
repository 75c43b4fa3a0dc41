#pragma once

#include <span>
#include <string>
#include <vector>

#include "suffstat/linalg.hpp"
#include "suffstat/model.hpp"

namespace suffstat {

// Integration measure for the quadratic form: `weighted` integrates the
// squared log-derivatives against p(.;xi) * mu0, `unweighted` against mu0
// alone. Every metric value records which one produced it.
enum class Convention { weighted, unweighted };

const char* convention_name(Convention c);

// Gram matrix of the quadratic form at one parameter point.
struct MetricMatrix {
  std::vector<double> point;
  std::size_t dim = 0;
  Convention convention = Convention::weighted;
  SmallMatrix entries;

  double at(std::size_t i, std::size_t j) const { return entries.at(i, j); }
  double quad(std::span<const double> v) const;  // v^T G v
  double trace() const { return entries.trace(); }
  double det() const { return determinant(entries); }
};

// Density value and gradient of log p per outcome, in outcome order.
struct OutcomeDerivative {
  double density = 0.0;
  std::vector<double> grad_log;
};

std::vector<OutcomeDerivative> log_derivative(const ParametrizedModel& model,
                                              std::span<const double> xi);

MetricMatrix fisher_matrix(const ParametrizedModel& model, std::span<const double> xi,
                           Convention convention);

// v^T (G - G') v where G' comes from the model induced by kappa.
double information_loss(const ParametrizedModel& model, const Statistic& kappa,
                        std::span<const double> xi, std::span<const double> v,
                        Convention convention);
double information_loss(const ParametrizedModel& model, const ParametrizedModel& induced,
                        std::span<const double> xi, std::span<const double> v,
                        Convention convention);

// Sweeps the grid and compares lambda_max(G' - G) against 1e-10 * trace(G).
// `holds` is meaningful under the weighted convention, where the comparison
// is a theorem; unweighted runs only tally violations.
struct MonotonicityReport {
  Convention convention = Convention::weighted;
  std::size_t points_checked = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  // max over grid of lambda_max(G'-G) - tol*trace(G)
  std::vector<double> worst_point;
  bool holds = true;
};

MonotonicityReport check_monotonicity(const ParametrizedModel& model,
                                      const Statistic& kappa, const Grid& grid,
                                      Convention convention);

}  // namespace suffstat
