#include "suffstat/coin_closed.hpp"

#include <cmath>
#include <tuple>

#include "suffstat/dual.hpp"

namespace suffstat {

namespace {

// C(n,k) exactly in double (n <= 64 keeps every value integral and exact
// well below 2^53 for n <= 24; larger n is rejected at model construction).
double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / i;
  return std::nearbyint(r);
}

// One outcome class: density value/derivative and integration weight.
template <typename DensityFn>
double grouped_form(int classes, DensityFn&& density_of_class, Convention convention) {
  double g = 0.0;
  for (int c = 0; c < classes; ++c) {
    auto [mult, mu, p] = density_of_class(c);
    const double dlog = p.grad[0] / p.value;
    const double w = convention == Convention::weighted ? p.value * mu : mu;
    g += mult * w * dlog * dlog;
  }
  return g;
}

DualVector bernoulli_dual(double xi, int a, int total) {
  DualVector x = dual_variable(1, 0, xi);
  return dual_mul(dual_pow_int(x, a),
                  dual_pow_int(dual_sub(dual_constant(1, 1.0), x), total - a));
}

// Density of the block image w.r.t. the pushed-forward counting measure:
// p'(class l) = (xi^n)^l (1 - xi^n)^(m-l) / (2^n - 1)^(m-l); each non-all-ones
// block contributes 2^n - 1 preimages.
DualVector block_induced_dual(double xi, int l, int m, int n) {
  DualVector xn = dual_pow_int(dual_variable(1, 0, xi), n);
  DualVector raw = dual_mul(dual_pow_int(xn, l),
                            dual_pow_int(dual_sub(dual_constant(1, 1.0), xn), m - l));
  const double fiber = std::pow(std::ldexp(1.0, n) - 1.0, m - l);
  raw.value /= fiber;
  for (double& g : raw.grad) g /= fiber;
  return raw;
}

MetricMatrix scalar_metric(double value, double xi, Convention convention) {
  MetricMatrix g;
  g.point = {xi};
  g.dim = 1;
  g.convention = convention;
  g.entries = SmallMatrix(1);
  g.entries.at(0, 0) = value;
  return g;
}

}  // namespace

MetricPairFn coin_block_pair_evaluator(int m, int n, CoinStatisticKind kind,
                                       Convention convention) {
  if (m < 1 || n < 1) throw ConfigError("coin evaluator needs m,n >= 1");
  const int mn = m * n;
  if (mn > 64) throw ResourceError("coin evaluator capped at mn <= 64");

  return [m, n, mn, kind, convention](std::span<const double> xi_span) {
    const double xi = xi_span[0];
    if (!(xi > 0.0) || !(xi < 1.0))
      throw DomainError("parameter " + std::to_string(xi) + " outside (0,1)");

    const double g = grouped_form(
        mn + 1,
        [&](int s) {
          return std::tuple{binom(mn, s), 1.0, bernoulli_dual(xi, s, mn)};
        },
        convention);

    double gp = 0.0;
    switch (kind) {
      case CoinStatisticKind::identity:
      case CoinStatisticKind::heads:
        // Heads count keeps the density classes intact: the induced form
        // coincides with g term by term.
        gp = g;
        break;
      case CoinStatisticKind::block: {
        const double fiber0 = std::ldexp(1.0, n) - 1.0;  // 2^n - 1
        gp = grouped_form(
            m + 1,
            [&](int l) {
              return std::tuple{binom(m, l), std::pow(fiber0, m - l),
                                block_induced_dual(xi, l, m, n)};
            },
            convention);
        break;
      }
    }
    return std::make_pair(scalar_metric(g, xi, convention),
                          scalar_metric(gp, xi, convention));
  };
}

Grid coin_block_grid(std::size_t per_axis, double eps) {
  if (per_axis < 1) throw ConfigError("grid needs at least one point per axis");
  Grid g;
  g.dim = 1;
  g.eps = eps;
  g.axis_counts = {per_axis};
  g.axis_values.resize(1);
  const double lo = eps;
  const double hi = 1.0 - eps;
  if (!(lo < hi)) throw ConfigError("eps empties the parameter interval");
  g.axis_values[0].resize(per_axis);
  if (per_axis == 1) {
    g.axis_values[0][0] = 0.5;
  } else {
    const double step = (hi - lo) / static_cast<double>(per_axis - 1);
    for (std::size_t i = 0; i < per_axis; ++i)
      g.axis_values[0][i] = lo + step * static_cast<double>(i);
  }
  for (std::size_t i = 0; i < per_axis; ++i) {
    g.points.push_back({g.axis_values[0][i]});
    g.coords.push_back({i});
  }
  return g;
}

double coin_block_g_unweighted(int m, int n, double xi) {
  const double mn = static_cast<double>(m) * n;
  const double a2 = mn * mn * std::ldexp(1.0, m * n);
  const double a0 = mn * (mn + 1.0) * std::ldexp(1.0, m * n - 2);
  const double denom = xi * (1.0 - xi);
  return (a2 * xi * xi - a2 * xi + a0) / (denom * denom);
}

double coin_block_gp_unweighted(int m, int n, double xi) {
  const double mn = static_cast<double>(m) * n;
  const double b2 = mn * mn * std::ldexp(1.0, m * n);
  const double b1 = 2.0 * mn * mn * std::ldexp(1.0, (m - 1) * n);
  const double b0 = static_cast<double>(m) * n * n *
                    (std::ldexp(1.0, n) + m - 1.0) * std::ldexp(1.0, (m - 2) * n);
  const double xin = std::pow(xi, n);
  const double denom = xi * (1.0 - xin);
  return (b2 * xin * xin - b1 * xin + b0) / (denom * denom);
}

double coin_block_g_weighted(int m, int n, double xi) {
  return static_cast<double>(m) * n / (xi * (1.0 - xi));
}

}  // namespace suffstat
