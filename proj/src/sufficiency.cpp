#include "suffstat/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "suffstat/parallel.hpp"

namespace suffstat {

namespace {

constexpr double kGoldenInv = 0.6180339887498948482;  // 1/phi

// 16-point Gauss-Legendre rule on [0,1].
struct GaussLegendre16 {
  double node[16];
  double weight[16];
  GaussLegendre16() {
    static const double x[8] = {
        0.0950125098376374401853193, 0.2816035507792589132304605,
        0.4580167776572273863424194, 0.6178762444026437484466718,
        0.7554044083550030338951012, 0.8656312023878317438804679,
        0.9445750230732325760779884, 0.9894009349916499325961542,
    };
    static const double w[8] = {
        0.1894506104550684962853967, 0.1826034150449235888667637,
        0.1691565193950025381893121, 0.1495959888165767320815017,
        0.1246289712555338720524763, 0.0951585116824927848099251,
        0.0622535239386478928628438, 0.0271524594117540948517806,
    };
    for (int i = 0; i < 8; ++i) {
      node[2 * i] = 0.5 * (1.0 - x[i]);
      node[2 * i + 1] = 0.5 * (1.0 + x[i]);
      weight[2 * i] = 0.5 * w[i];
      weight[2 * i + 1] = 0.5 * w[i];
    }
  }
};

const GaussLegendre16& gl16() {
  static const GaussLegendre16 rule;
  return rule;
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double sum = left + right;
  if (depth <= 0) return sum;
  if (std::fabs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(std::fabs(whole) * rel_tol, 1e-300);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Straight-segment length from a to b under the Fisher metric, GL16.
double segment_length(const ParametrizedModel& model, Convention convention,
                      std::span<const double> a, std::span<const double> b) {
  const std::size_t d = a.size();
  std::vector<double> u(d), x(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = b[i] - a[i];
  const auto& rule = gl16();
  double len = 0.0;
  for (int q = 0; q < 16; ++q) {
    const double t = rule.node[q];
    for (std::size_t i = 0; i < d; ++i) x[i] = a[i] + t * u[i];
    MetricMatrix g = fisher_matrix(model, x, convention);
    len += rule.weight[q] * std::sqrt(std::max(g.quad(u), 0.0));
  }
  return len;
}

std::vector<double> midpoint(std::span<const double> a, std::span<const double> b) {
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

// Integration weights per outcome for one convention; weighted uses the
// densities at `xi`.
std::vector<double> convention_weights(const ParametrizedModel& model,
                                       std::span<const double> xi,
                                       Convention convention) {
  const std::size_t n = model.space().size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = model.base().weight(i);
    w[i] = convention == Convention::weighted
               ? model.density_grad(i, xi).value * mu
               : mu;
  }
  return w;
}

}  // namespace

double min_ratio(const MetricMatrix& g, const MetricMatrix& gp) {
  if (g.dim != gp.dim) throw ConfigError("metric dimension mismatch");
  if (g.convention != gp.convention)
    throw ConfigError("metric convention mismatch");
  const std::size_t d = g.dim;

  if (d == 1) {
    const double gv = g.at(0, 0);
    if (!(gv > 1e-300))
      throw DegenerateMetricError("metric is singular at xi = " +
                                  point_to_string(g.point));
    return gp.at(0, 0) / gv;
  }

  const double tr = g.trace();
  const auto ev_g = sym_eigenvalues(g.entries);
  if (!(ev_g.front() > 1e-12 * tr))
    throw DegenerateMetricError("metric has near-zero eigenvalue " +
                                std::to_string(ev_g.front()) + " at xi = " +
                                point_to_string(g.point));

  SmallMatrix l = g.entries;
  if (ev_g.front() < 1e-10 * tr)
    for (std::size_t i = 0; i < d; ++i) l.at(i, i) += 1e-12 * tr;
  if (!cholesky_lower(l)) {
    l = g.entries;
    for (std::size_t i = 0; i < d; ++i) l.at(i, i) += 1e-12 * tr;
    if (!cholesky_lower(l))
      throw DegenerateMetricError("Cholesky factorization failed at xi = " +
                                  point_to_string(g.point));
  }

  return reduced_min_eigenvalue(l, gp.entries);
}

double reduced_min_eigenvalue(const SmallMatrix& chol_lower, const SmallMatrix& a) {
  SmallMatrix b = congruence_reduce(chol_lower, a);
  double lam = sym_eigenvalues(b).front();
  // The reduced matrix is a Gram matrix; eigenvalues at rounding level are
  // zeros of a rank-deficient form.
  const double floor = 1e-12 * std::max(b.trace(), 0.0);
  if (lam < floor) lam = 0.0;
  return lam;
}

MetricPairFn model_pair_evaluator(const ParametrizedModel& model, const Statistic& kappa,
                                  Convention convention) {
  ParametrizedModel induced = induced_model(model, kappa);
  return [model, induced, convention](std::span<const double> xi) {
    return std::make_pair(fisher_matrix(model, xi, convention),
                          fisher_matrix(induced, xi, convention));
  };
}

namespace {

struct PointResult {
  double lambda;
  double gd;
  double gpd;
};

PointResult eval_point(const MetricPairFn& eval, std::span<const double> xi) {
  auto [g, gp] = eval(xi);
  return PointResult{min_ratio(g, gp), g.det(), gp.det()};
}

void append_point(DeltaReport& r, std::vector<double> pt, const PointResult& pr) {
  r.points.push_back(std::move(pt));
  r.lambda_min.push_back(pr.lambda);
  r.g_det.push_back(pr.gd);
  r.gp_det.push_back(pr.gpd);
}

}  // namespace

DeltaReport estimate_delta_scan(const MetricPairFn& eval, const Grid& grid,
                                Convention convention, int refine_rounds,
                                bool simplex_constraint) {
  if (grid.size() == 0) throw ConfigError("delta estimation needs a nonempty grid");
  DeltaReport report;
  report.convention = convention;
  report.eps = grid.eps;
  report.base_grid_size = grid.size();
  report.refine_rounds = refine_rounds;
  report.points = grid.points;
  report.lambda_min.resize(grid.size());
  report.g_det.resize(grid.size());
  report.gp_det.resize(grid.size());

  parallel_for(grid.size(), [&](std::size_t i) {
    PointResult pr = eval_point(eval, grid.points[i]);
    report.lambda_min[i] = pr.lambda;
    report.g_det[i] = pr.gd;
    report.gp_det[i] = pr.gpd;
  });

  auto argmin_of = [&report]() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.lambda_min.size(); ++i)
      if (report.lambda_min[i] < report.lambda_min[best]) best = i;
    return best;
  };

  const std::size_t d = grid.dim;
  std::vector<double> axis_lo(d), axis_hi(d), axis_step(d);
  for (std::size_t a = 0; a < d; ++a) {
    axis_lo[a] = grid.axis_values[a].front();
    axis_hi[a] = grid.axis_values[a].back();
    axis_step[a] = grid.axis_step(a);
  }
  auto in_range = [&](std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      if (x[a] < axis_lo[a] || x[a] > axis_hi[a]) return false;
      sum += x[a];
    }
    return !simplex_constraint || sum <= 1.0 - grid.eps;
  };

  std::size_t best = argmin_of();

  if (d == 1 && grid.size() >= 2) {
    for (int round = 0; round < refine_rounds; ++round) {
      // Bracket the current argmin with its nearest stored neighbors.
      const double x_best = report.points[best][0];
      double lo = axis_lo[0];
      double hi = axis_hi[0];
      for (std::size_t i = 0; i < report.points.size(); ++i) {
        const double x = report.points[i][0];
        if (x < x_best && x > lo) lo = x;
        if (x > x_best && x < hi) hi = x;
      }
      if (!(hi > lo)) break;
      double a = lo, b = hi;
      double c = b - kGoldenInv * (b - a);
      double e = a + kGoldenInv * (b - a);
      PointResult pc = eval_point(eval, std::vector<double>{c});
      PointResult pe = eval_point(eval, std::vector<double>{e});
      append_point(report, {c}, pc);
      append_point(report, {e}, pe);
      for (int it = 0; it < 28; ++it) {
        if (pc.lambda <= pe.lambda) {
          b = e;
          e = c;
          pe = pc;
          c = b - kGoldenInv * (b - a);
          pc = eval_point(eval, std::vector<double>{c});
          append_point(report, {c}, pc);
        } else {
          a = c;
          c = e;
          pc = pe;
          e = a + kGoldenInv * (b - a);
          pe = eval_point(eval, std::vector<double>{e});
          append_point(report, {e}, pe);
        }
      }
      best = argmin_of();
    }
  } else if (d >= 2) {
    for (int round = 1; round <= refine_rounds; ++round) {
      const std::vector<double> center = report.points[best];
      const double shrink = std::pow(4.0, round);
      // 5^d neighborhood at the shrunken step.
      std::vector<int> offset(d, -2);
      for (;;) {
        bool all_zero = true;
        std::vector<double> pt(d);
        for (std::size_t a = 0; a < d; ++a) {
          if (offset[a] != 0) all_zero = false;
          pt[a] = center[a] + offset[a] * axis_step[a] / shrink;
        }
        if (!all_zero && in_range(pt)) {
          PointResult pr = eval_point(eval, pt);
          append_point(report, std::move(pt), pr);
        }
        std::size_t a = d;
        bool done = false;
        while (a > 0) {
          --a;
          if (++offset[a] <= 2) break;
          offset[a] = -2;
          if (a == 0) done = true;
        }
        if (done) break;
      }
      best = argmin_of();
    }
  }

  report.argmin_index = best;
  report.argmin = report.points[best];
  report.delta_sq_hat = report.lambda_min[best];
  report.delta_hat = std::sqrt(std::max(report.delta_sq_hat, 0.0));

  bool boundary = false;
  double sum = 0.0;
  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < d; ++a) {
    const double margin = 0.51 * axis_step[a];
    if (report.argmin[a] <= axis_lo[a] + margin || report.argmin[a] >= axis_hi[a] - margin)
      boundary = true;
    sum += report.argmin[a];
    min_step = std::min(min_step, axis_step[a]);
  }
  if (simplex_constraint && sum >= (1.0 - grid.eps) - 0.51 * min_step) boundary = true;
  report.boundary_infimum = boundary;
  return report;
}

DeltaReport estimate_delta(const ParametrizedModel& model, const Statistic& kappa,
                           const Grid& grid, Convention convention, int refine_rounds) {
  return estimate_delta_scan(model_pair_evaluator(model, kappa, convention), grid,
                             convention, refine_rounds, model.has_simplex_constraint());
}

PythagorasCheck pythagoras_check(const ParametrizedModel& model, const Statistic& kappa,
                                 std::span<const double> xi, std::span<const double> v) {
  if (!model.space().same_as(kappa.source()))
    throw ConfigError("statistic source does not match model space");
  bool zero = true;
  for (double x : v)
    if (x != 0.0) zero = false;
  if (zero) throw ConfigError("pythagoras residual needs a nonzero direction");

  ParametrizedModel induced = induced_model(model, kappa);
  auto derivs = log_derivative(model, xi);
  auto derivs_p = log_derivative(induced, xi);

  auto dot = [&](const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * v[i];
    return s;
  };

  double nn_diff = 0.0, nn_phi = 0.0, nn_pull = 0.0;
  for (std::size_t w = 0; w < derivs.size(); ++w) {
    const double weight = derivs[w].density * model.base().weight(w);
    const double phi = dot(derivs[w].grad_log);
    const double pull = dot(derivs_p[kappa.apply(w)].grad_log);
    nn_diff += (phi - pull) * (phi - pull) * weight;
    nn_phi += phi * phi * weight;
    nn_pull += pull * pull * weight;
  }
  return PythagorasCheck{std::fabs(nn_diff - (nn_phi - nn_pull)), nn_phi};
}

double pythagoras_residual(const ParametrizedModel& model, const Statistic& kappa,
                           std::span<const double> xi, std::span<const double> v) {
  return pythagoras_check(model, kappa, xi, v).residual;
}

ConditionIIReport check_condition_ii(const ParametrizedModel& model,
                                     const Statistic& kappa, const Grid& grid,
                                     double delta, Convention convention,
                                     std::uint64_t seed,
                                     std::size_t random_directions) {
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw ConfigError("condition (ii) needs 0 < delta <= 1");

  const std::size_t d = model.dim();
  std::vector<std::vector<double>> directions;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> e(d, 0.0);
    e[i] = 1.0;
    directions.push_back(std::move(e));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t r = 0; r < random_directions; ++r) {
    std::vector<double> u(d);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : u) {
        x = gauss(rng);
        norm += x * x;
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (double& x : u) x /= norm;
    directions.push_back(std::move(u));
  }

  ParametrizedModel induced = induced_model(model, kappa);
  const double factor = std::sqrt(std::max(0.0, 1.0 - delta * delta));

  ConditionIIReport report;
  report.convention = convention;
  report.delta = delta;
  report.seed = seed;
  report.random_directions = random_directions;
  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_margin_rel = std::numeric_limits<double>::infinity();

  for (const auto& pt : grid.points) {
    auto derivs = log_derivative(model, pt);
    auto derivs_p = log_derivative(induced, pt);
    auto weights = convention_weights(model, pt, convention);
    for (const auto& v : directions) {
      double nn_phi = 0.0, nn_diff = 0.0;
      for (std::size_t w = 0; w < derivs.size(); ++w) {
        double phi = 0.0, pull = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          phi += derivs[w].grad_log[c] * v[c];
          pull += derivs_p[kappa.apply(w)].grad_log[c] * v[c];
        }
        nn_phi += phi * phi * weights[w];
        nn_diff += (phi - pull) * (phi - pull) * weights[w];
      }
      const double norm_phi = std::sqrt(nn_phi);
      const double margin = factor * norm_phi - std::sqrt(nn_diff);
      const double rel = norm_phi > 0.0 ? margin / norm_phi : 0.0;
      if (rel < report.min_margin_rel) {
        report.min_margin_rel = rel;
        report.min_margin = margin;
        report.worst_point = pt;
        report.worst_direction = v;
      }
    }
  }
  report.holds = report.min_margin_rel >= -1e-9;
  return report;
}

namespace {

// Lattice shortest-path distance for dim >= 2 (3^d - 1 neighbor offsets).
double lattice_distance(const ParametrizedModel& model, std::span<const double> xi0,
                        std::span<const double> xi1, Convention convention,
                        std::size_t res) {
  const std::size_t d = model.dim();
  const double eps = 1e-4;
  Grid grid = make_grid(model, res, eps, 16'000'000);
  const std::size_t n = grid.size();

  // Node lookup by lattice coordinates.
  std::size_t total = 1;
  for (std::size_t c : grid.axis_counts) total *= c;
  std::vector<std::size_t> lookup(total, static_cast<std::size_t>(-1));
  auto linear = [&](const std::vector<std::size_t>& c) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < d; ++a) idx = idx * grid.axis_counts[a] + c[a];
    return idx;
  };
  for (std::size_t p = 0; p < n; ++p) lookup[linear(grid.coords[p])] = p;

  auto snap = [&](std::span<const double> x) {
    std::size_t bestp = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n; ++p) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double dx = grid.points[p][a] - x[a];
        s += dx * dx;
      }
      if (s < bestd) {
        bestd = s;
        bestp = p;
      }
    }
    return bestp;
  };
  const std::size_t src = snap(xi0);
  const std::size_t dst = snap(xi1);

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);
  std::vector<int> offset(d);
  while (!pq.empty()) {
    auto [dd, p] = pq.top();
    pq.pop();
    if (dd > dist[p]) continue;
    if (p == dst) break;
    offset.assign(d, -1);
    for (;;) {
      bool all_zero = true;
      bool ok = true;
      std::vector<std::size_t> c = grid.coords[p];
      for (std::size_t a = 0; a < d; ++a) {
        if (offset[a] != 0) all_zero = false;
        const long long nc = static_cast<long long>(c[a]) + offset[a];
        if (nc < 0 || nc >= static_cast<long long>(grid.axis_counts[a])) ok = false;
        c[a] = static_cast<std::size_t>(nc);
      }
      if (!all_zero && ok) {
        const std::size_t q = lookup[linear(c)];
        if (q != static_cast<std::size_t>(-1)) {
          const double len =
              segment_length(model, convention, grid.points[p], grid.points[q]);
          if (dist[p] + len < dist[q]) {
            dist[q] = dist[p] + len;
            pq.emplace(dist[q], q);
          }
        }
      }
      std::size_t a = d;
      bool done = false;
      while (a > 0) {
        --a;
        if (++offset[a] <= 1) break;
        offset[a] = -1;
        if (a == 0) done = true;
      }
      if (done) break;
    }
  }

  double total_dist = dist[dst];
  total_dist += segment_length(model, convention, xi0, grid.points[src]);
  total_dist += segment_length(model, convention, xi1, grid.points[dst]);
  return total_dist;
}

}  // namespace

double riemannian_distance(const ParametrizedModel& model, std::span<const double> xi0,
                           std::span<const double> xi1, Convention convention,
                           std::size_t grid_res) {
  model.require_interior(xi0);
  model.require_interior(xi1);
  const std::size_t d = model.dim();
  bool equal = true;
  for (std::size_t a = 0; a < d; ++a)
    if (xi0[a] != xi1[a]) equal = false;
  if (equal) return 0.0;

  if (d == 1) {
    const double a = std::min(xi0[0], xi1[0]);
    const double b = std::max(xi0[0], xi1[0]);
    auto speed = [&](double x) {
      std::vector<double> pt{x};
      return std::sqrt(std::max(fisher_matrix(model, pt, convention).at(0, 0), 0.0));
    };
    return adaptive_simpson(speed, a, b, 1e-8);
  }
  return lattice_distance(model, xi0, xi1, convention, grid_res);
}

DistanceTable distance_table(const ParametrizedModel& model,
                             std::vector<std::vector<double>> points,
                             Convention convention, std::size_t grid_res) {
  const std::size_t k = points.size();
  DistanceTable table;
  table.points = std::move(points);
  table.values.assign(k * k, 0.0);
  if (model.dim() == 1) {
    table.method = "exact-1d-quadrature";
    // Cumulative arc length from the leftmost point keeps the table
    // symmetric and triangle-consistent by construction.
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return table.points[a][0] < table.points[b][0];
    });
    std::vector<double> cum(k, 0.0);
    for (std::size_t r = 1; r < k; ++r) {
      const auto& prev = table.points[order[r - 1]];
      const auto& cur = table.points[order[r]];
      cum[r] = cum[r - 1] + riemannian_distance(model, prev, cur, convention, grid_res);
    }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        table.values[order[i] * k + order[j]] = std::fabs(cum[i] - cum[j]);
    return table;
  }
  table.method = "grid-graph-shortest-path";
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double dd =
          riemannian_distance(model, table.points[i], table.points[j], convention,
                              grid_res);
      table.values[i * k + j] = dd;
      table.values[j * k + i] = dd;
    }
  return table;
}

namespace {

// log t per outcome at one point, t = p / (p' o kappa).
std::vector<double> log_t_canonical(const ParametrizedModel& model,
                                    const ParametrizedModel& induced,
                                    const Statistic& kappa, std::span<const double> xi) {
  const std::size_t n = model.space().size();
  std::vector<double> lt(n);
  for (std::size_t w = 0; w < n; ++w) {
    const double p = model.density_grad(w, xi).value;
    const double pp = induced.density_grad(kappa.apply(w), xi).value;
    lt[w] = std::log(p) - std::log(pp);
  }
  return lt;
}

double weighted_norm_sq(const std::vector<double>& f, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i] * w[i];
  return s;
}

}  // namespace

LipschitzReport lipschitz_estimate(const ParametrizedModel& model, const Statistic& kappa,
                                   const Grid& grid, Convention convention) {
  if (grid.size() < 2) throw ConfigError("Lipschitz estimate needs at least two points");
  ParametrizedModel induced = induced_model(model, kappa);
  const std::size_t n = model.space().size();

  std::vector<std::vector<double>> lt(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    lt[i] = log_t_canonical(model, induced, kappa, grid.points[i]);

  LipschitzReport report;
  for (const auto& [ia, ib] : grid.adjacent_pairs()) {
    const auto mid = midpoint(grid.points[ia], grid.points[ib]);
    auto weights = convention_weights(model, mid, convention);
    std::vector<double> diff(n);
    for (std::size_t w = 0; w < n; ++w) diff[w] = lt[ia][w] - lt[ib][w];
    const double num = std::sqrt(weighted_norm_sq(diff, weights));
    const double den =
        segment_length(model, convention, grid.points[ia], grid.points[ib]);
    if (!(den > 0.0)) continue;
    const double q = num / den;
    if (q > report.estimate) {
      report.estimate = q;
      report.argmax_a = ia;
      report.argmax_b = ib;
    }
  }
  return report;
}

Factorization canonical_factorization(const ParametrizedModel& model,
                                      const Statistic& kappa) {
  if (!model.space().same_as(kappa.source()))
    throw ConfigError("statistic source does not match model space");
  ParametrizedModel induced = induced_model(model, kappa);
  auto map = std::make_shared<std::vector<std::size_t>>();
  map->reserve(model.space().size());
  for (std::size_t w = 0; w < model.space().size(); ++w) map->push_back(kappa.apply(w));

  Factorization f;
  f.s = [induced](std::size_t wp, std::span<const double> xi) {
    return induced.density_grad(wp, xi).value;
  };
  f.t = [model, induced, map](std::size_t w, std::span<const double> xi) {
    return model.density_grad(w, xi).value /
           induced.density_grad((*map)[w], xi).value;
  };
  f.s_desc = "p'";
  f.t_desc = "p/(p' o kappa)";
  return f;
}

ConditionIVReport check_condition_iv(const ParametrizedModel& model,
                                     const Statistic& kappa, const Factorization& f,
                                     const Grid& grid, double delta,
                                     Convention convention) {
  if (!(delta > 0.0) || !(delta <= 1.0))
    throw ConfigError("condition (iv) needs 0 < delta <= 1");
  ParametrizedModel induced = induced_model(model, kappa);
  const std::size_t n = model.space().size();
  const std::size_t np = kappa.target().size();

  ConditionIVReport report;
  report.delta = delta;
  report.convention = convention;

  // (a) reconstruction and positivity of t.
  double worst = 0.0;
  std::size_t worst_w = 0;
  std::vector<double> worst_pt;
  for (const auto& pt : grid.points) {
    for (std::size_t w = 0; w < n; ++w) {
      const double tv = f.t(w, pt);
      if (!(tv > 0.0))
        throw FactorizationError("factorization has non-positive t at outcome '" +
                                 model.space().label(w) + "', xi = " +
                                 point_to_string(pt));
      const double recon = f.s(kappa.apply(w), pt) * tv;
      const double p = model.density_grad(w, pt).value;
      const double rel = std::fabs(recon - p) / p;
      if (rel > worst) {
        worst = rel;
        worst_w = w;
        worst_pt = pt;
      }
    }
  }
  report.worst_reconstruction_rel = worst;
  if (worst > 1e-9)
    throw FactorizationError(
        "factorization fails reconstruction: worst relative error " +
        std::to_string(worst) + " at outcome '" + model.space().label(worst_w) +
        "', xi = " + point_to_string(worst_pt));

  // Per-point tables: log t, log t' (pushforward of t mu0), log canonical t.
  std::vector<std::vector<double>> log_t(grid.size()), log_tp(grid.size()),
      log_tc(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& pt = grid.points[i];
    log_t[i].resize(n);
    for (std::size_t w = 0; w < n; ++w) log_t[i][w] = std::log(f.t(w, pt));
    log_tp[i].resize(np);
    for (std::size_t wp = 0; wp < np; ++wp) {
      double s = 0.0;
      for (std::size_t w : kappa.fiber_indices(wp))
        s += f.t(w, pt) * model.base().weight(w);
      log_tp[i][wp] = std::log(s / induced.base().weight(wp));
    }
    log_tc[i] = log_t_canonical(model, induced, kappa, pt);
  }

  // (b) Lipschitz of xi -> log t; (c) pushforward chain.
  report.lipschitz_bound = std::sqrt(std::max(0.0, 1.0 - delta * delta));
  double est = 0.0;
  double chain_worst = 0.0;
  for (const auto& [ia, ib] : grid.adjacent_pairs()) {
    const auto mid = midpoint(grid.points[ia], grid.points[ib]);
    auto weights = convention_weights(model, mid, convention);

    std::vector<double> d_t(n), d_tc(n), d_pull(n), d_logp(n);
    for (std::size_t w = 0; w < n; ++w) {
      d_t[w] = log_t[ia][w] - log_t[ib][w];
      d_tc[w] = log_tc[ia][w] - log_tc[ib][w];
      d_pull[w] = log_tp[ia][kappa.apply(w)] - log_tp[ib][kappa.apply(w)];
      d_logp[w] = std::log(model.density_grad(w, grid.points[ia]).value) -
                  std::log(model.density_grad(w, grid.points[ib]).value);
    }
    const double den =
        segment_length(model, convention, grid.points[ia], grid.points[ib]);
    if (den > 0.0)
      est = std::max(est, std::sqrt(weighted_norm_sq(d_t, weights)) / den);

    const double lhs = weighted_norm_sq(d_tc, weights);
    const double rhs =
        weighted_norm_sq(d_t, weights) - weighted_norm_sq(d_pull, weights);
    const double scale = std::max(weighted_norm_sq(d_logp, weights), 1e-300);
    chain_worst = std::max(chain_worst, std::fabs(lhs - rhs) / scale);
  }
  report.lipschitz_estimate = est;
  report.lipschitz_ok = est <= report.lipschitz_bound + 1e-6;
  report.chain_residual_max = chain_worst;
  report.chain_ok = chain_worst <= 1e-9;
  report.holds = report.lipschitz_ok && report.chain_ok;
  return report;
}

}  // namespace suffstat
