#pragma once

#include <random>
#include <string>
#include <vector>

#include "suffstat/model.hpp"

// Test-only generators and oracles, independent of the library's evaluation
// paths wherever they act as a reference.

namespace suffstat::testing {

// Central finite differences of the value-only evaluator; reference for the
// dual-number gradients.
inline std::vector<double> fd_gradient(const Expr& e, std::vector<double> xi,
                                       double h = 1e-6) {
  std::vector<double> g(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double x = xi[i];
    xi[i] = x + h;
    const double up = e.eval(xi);
    xi[i] = x - h;
    const double down = e.eval(xi);
    xi[i] = x;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Random expression text over x1..xd, built from templates whose values and
// gradients stay well-conditioned on [0.2, 0.8]^d.
inline std::string random_expr_text(std::mt19937_64& rng, std::size_t dim, int depth) {
  std::uniform_real_distribution<double> coef(0.5, 2.5);
  std::uniform_int_distribution<int> var(1, static_cast<int>(dim));
  auto v = [&] { return "x" + std::to_string(var(rng)); };
  auto c = [&] {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", coef(rng));
    return std::string(buf);
  };
  if (depth <= 0) {
    std::uniform_int_distribution<int> leaf(0, 2);
    switch (leaf(rng)) {
      case 0: return c();
      case 1: return v();
      default: return c() + "*" + v();
    }
  }
  std::uniform_int_distribution<int> kind(0, 7);
  const std::string a = random_expr_text(rng, dim, depth - 1);
  const std::string b = random_expr_text(rng, dim, depth - 1);
  switch (kind(rng)) {
    case 0: return "(" + a + ")+(" + b + ")";
    case 1: return "(" + a + ")-(" + b + ")";
    case 2: return "(" + a + ")*(" + b + ")";
    case 3: return "(" + a + ")/((" + b + ")+3)";
    case 4: return "(" + a + ")^2";
    case 5: return "exp(0.25*(" + a + "))";
    case 6: return "log((" + a + ")+2)";
    default: return "sqrt((" + a + ")+2)";
  }
}

// Expression-backed random model: positive affine-ish densities on (0,1)^d.
inline ParametrizedModel random_model(std::mt19937_64& rng, std::size_t n_outcomes,
                                      std::size_t dim) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n_outcomes; ++i) labels.push_back("w" + std::to_string(i));
  auto space = make_space(std::move(labels));

  std::uniform_real_distribution<double> mu_dist(0.25, 2.0);
  std::vector<double> mu0(n_outcomes);
  for (double& w : mu0) w = mu_dist(rng);
  FiniteMeasure base(space, std::move(mu0));

  std::uniform_real_distribution<double> a_dist(0.4, 1.2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Expr> densities;
  for (std::size_t w = 0; w < n_outcomes; ++w) {
    const double a = a_dist(rng);
    // |b| + |c| + |e| < a keeps the density positive on the closed box.
    double b = unit(rng), cc = unit(rng), e = unit(rng);
    const double norm = (std::abs(b) + std::abs(cc) + std::abs(e)) / (0.85 * a);
    if (norm > 0) {
      b /= std::max(norm, 1.0);
      cc /= std::max(norm, 1.0);
      e /= std::max(norm, 1.0);
    }
    char buf[160];
    if (dim == 1) {
      std::snprintf(buf, sizeof(buf), "%.6f+%.6f*x1+%.6f*x1^2", a, b, 0.3 * cc);
    } else {
      std::snprintf(buf, sizeof(buf), "%.6f+%.6f*x1+%.6f*x2+%.6f*x1*x2", a, b, cc, e);
    }
    densities.push_back(Expr::parse(buf, dim));
  }
  std::vector<Interval> box(dim, Interval{0.0, 1.0});
  return make_expr_model(space, std::move(base), dim, std::move(box), false,
                         std::move(densities), "random_model");
}

// Surjective random statistic onto at most `max_target` outcomes.
inline Statistic random_statistic(std::mt19937_64& rng, SpacePtr source,
                                  std::size_t max_target) {
  const std::size_t n = source->size();
  std::uniform_int_distribution<std::size_t> t_dist(1, std::min(max_target, n));
  const std::size_t t = t_dist(rng);
  std::uniform_int_distribution<std::size_t> pick(0, t - 1);
  std::vector<std::size_t> raw(n);
  for (std::size_t w = 0; w < n; ++w) raw[w] = pick(rng);
  // Compact to the image so the map is surjective.
  std::vector<long> position(t, -1);
  std::vector<std::string> labels;
  std::vector<std::uint32_t> map(n);
  for (std::size_t w = 0; w < n; ++w) {
    if (position[raw[w]] < 0) {
      position[raw[w]] = static_cast<long>(labels.size());
      labels.push_back("t" + std::to_string(raw[w]));
    }
    map[w] = static_cast<std::uint32_t>(position[raw[w]]);
  }
  return Statistic(std::move(source), make_space(std::move(labels)), std::move(map));
}

inline std::vector<double> random_interior_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.15, 0.85);
  std::vector<double> xi(dim);
  for (double& x : xi) x = u(rng);
  return xi;
}

}  // namespace suffstat::testing
