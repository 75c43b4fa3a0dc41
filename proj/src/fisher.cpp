#include "suffstat/fisher.hpp"

#include <cmath>
#include <limits>

namespace suffstat {

const char* convention_name(Convention c) {
  return c == Convention::weighted ? "weighted" : "unweighted";
}

double MetricMatrix::quad(std::span<const double> v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) s += v[i] * entries.at(i, j) * v[j];
  return s;
}

std::vector<OutcomeDerivative> log_derivative(const ParametrizedModel& model,
                                              std::span<const double> xi) {
  const std::size_t n = model.space().size();
  const std::size_t d = model.dim();
  std::vector<OutcomeDerivative> out(n);
  for (std::size_t w = 0; w < n; ++w) {
    DualVector p = model.density_grad(w, xi);
    out[w].density = p.value;
    out[w].grad_log.resize(d);
    const double inv = 1.0 / p.value;
    for (std::size_t c = 0; c < d; ++c) out[w].grad_log[c] = p.grad[c] * inv;
  }
  return out;
}

MetricMatrix fisher_matrix(const ParametrizedModel& model, std::span<const double> xi,
                           Convention convention) {
  const std::size_t d = model.dim();
  MetricMatrix g;
  g.point.assign(xi.begin(), xi.end());
  g.dim = d;
  g.convention = convention;
  g.entries = SmallMatrix(d);

  auto derivs = log_derivative(model, xi);
  for (std::size_t w = 0; w < derivs.size(); ++w) {
    const double mu = model.base().weight(w);
    const double weight =
        convention == Convention::weighted ? derivs[w].density * mu : mu;
    const auto& gl = derivs[w].grad_log;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j)
        g.entries.at(i, j) += weight * gl[i] * gl[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) g.entries.at(j, i) = g.entries.at(i, j);
  return g;
}

double information_loss(const ParametrizedModel& model, const ParametrizedModel& induced,
                        std::span<const double> xi, std::span<const double> v,
                        Convention convention) {
  bool zero = true;
  for (double x : v)
    if (x != 0.0) zero = false;
  if (zero) throw ConfigError("information loss needs a nonzero direction");
  MetricMatrix g = fisher_matrix(model, xi, convention);
  MetricMatrix gp = fisher_matrix(induced, xi, convention);
  return g.quad(v) - gp.quad(v);
}

double information_loss(const ParametrizedModel& model, const Statistic& kappa,
                        std::span<const double> xi, std::span<const double> v,
                        Convention convention) {
  return information_loss(model, induced_model(model, kappa), xi, v, convention);
}

MonotonicityReport check_monotonicity(const ParametrizedModel& model,
                                      const Statistic& kappa, const Grid& grid,
                                      Convention convention) {
  MonotonicityReport report;
  report.convention = convention;
  ParametrizedModel induced = induced_model(model, kappa);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& pt : grid.points) {
    MetricMatrix g = fisher_matrix(model, pt, convention);
    MetricMatrix gp = fisher_matrix(induced, pt, convention);
    SmallMatrix diff(g.dim);
    for (std::size_t i = 0; i < g.dim; ++i)
      for (std::size_t j = 0; j < g.dim; ++j)
        diff.at(i, j) = gp.entries.at(i, j) - g.entries.at(i, j);
    const double lam_max = sym_eigenvalues(diff).back();
    const double tol = 1e-10 * g.trace();
    const double excess = lam_max - tol;
    ++report.points_checked;
    if (excess > 0.0) ++report.violations;
    if (excess > worst) {
      worst = excess;
      report.worst_point = pt;
    }
  }
  report.worst_excess = worst;
  report.holds = report.violations == 0;
  return report;
}

}  // namespace suffstat
