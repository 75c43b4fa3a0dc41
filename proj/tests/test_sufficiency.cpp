#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "suffstat/sufficiency.hpp"
#include "support/generators.hpp"

using namespace suffstat;

namespace {

MetricMatrix scalar(double v, Convention conv = Convention::weighted) {
  MetricMatrix m;
  m.point = {0.5};
  m.dim = 1;
  m.convention = conv;
  m.entries = SmallMatrix(1);
  m.entries.at(0, 0) = v;
  return m;
}

MetricMatrix diag2(double a, double b, Convention conv = Convention::weighted) {
  MetricMatrix m;
  m.point = {0.5, 0.5};
  m.dim = 2;
  m.convention = conv;
  m.entries = SmallMatrix(2);
  m.entries.at(0, 0) = a;
  m.entries.at(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("min_ratio basics") {
  CHECK(min_ratio(scalar(4.0), scalar(4.0)) == 1.0);
  CHECK(min_ratio(diag2(2, 2), diag2(2, 0)) == 0.0);
  CHECK_THROWS_AS(min_ratio(diag2(2, 0), diag2(2, 0)), DegenerateMetricError);
  CHECK_THROWS_AS(min_ratio(scalar(0.0), scalar(0.0)), DegenerateMetricError);

  // Merging outcomes 1 and 2 of the 3-categorical kills the second tangent
  // direction of the induced form.
  auto simplex = make_categorical_simplex(3);
  Statistic merge = Statistic::from_labels(simplex.space_ptr(), make_space({"0", "1"}),
                                           {"0", "1", "1"});
  ParametrizedModel induced = induced_model(simplex, merge);
  std::vector<double> xi{0.2, 0.3};
  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    MetricMatrix g = fisher_matrix(simplex, xi, conv);
    MetricMatrix gp = fisher_matrix(induced, xi, conv);
    CHECK(min_ratio(g, gp) == 0.0);
  }
}

TEST_CASE("delta estimation: sufficiency baselines") {
  auto coin = make_coin_block(2, 2);
  Statistic heads = bit_sum_statistic(coin.space_ptr());
  Grid grid = make_grid(coin, 41, 1e-4);
  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    DeltaReport r = estimate_delta(coin, heads, grid, conv);
    CHECK(std::fabs(r.delta_hat - 1.0) <= 1e-9);
  }

  // Identity statistic: ratio is exactly one per point.
  DeltaReport ident = estimate_delta(coin, identity_statistic(coin.space_ptr()), grid,
                                     Convention::weighted);
  CHECK(ident.delta_hat >= 1.0 - 1e-12);
  CHECK(ident.delta_hat <= 1.0 + 1e-9);
}

TEST_CASE("delta estimation: dependent-coins example") {
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 10000, 1e-4);
  DeltaReport r = estimate_delta(two, sum, grid, Convention::unweighted);
  CHECK(r.delta_sq_hat >= 0.4);
  CHECK(r.delta_sq_hat <= 0.401);
  CHECK(r.boundary_infimum);
  CHECK(r.argmin[0] == doctest::Approx(1e-4));
  // The stored curve includes refinement appends.
  CHECK(r.points.size() > grid.size());
  CHECK(r.points.size() == r.lambda_min.size());
}

TEST_CASE("delta estimation: weighted dependent-coins forms match closed forms") {
  // Summing (d log p)^2 p mu0 by hand:
  //   g  = 1/(1/2-xi) + 1/xi + 4 + 4 xi^2/(1/2-xi^2)
  //   g' = 1/(1/2-xi) + (1+2xi)^2/(xi(1+xi)) + 4 xi^2/(1/2-xi^2)
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  ParametrizedModel induced = induced_model(two, sum);
  auto gw = [](double x) {
    return 1.0 / (0.5 - x) + 1.0 / x + 4.0 + 4.0 * x * x / (0.5 - x * x);
  };
  auto gpw = [](double x) {
    return 1.0 / (0.5 - x) + (1.0 + 2.0 * x) * (1.0 + 2.0 * x) / (x * (1.0 + x)) +
           4.0 * x * x / (0.5 - x * x);
  };
  for (double x : {0.01, 0.1, 0.25, 0.4, 0.49}) {
    std::vector<double> pt{x};
    CHECK(fisher_matrix(two, pt, Convention::weighted).at(0, 0) ==
          doctest::Approx(gw(x)).epsilon(1e-13));
    CHECK(fisher_matrix(induced, pt, Convention::weighted).at(0, 0) ==
          doctest::Approx(gpw(x)).epsilon(1e-13));
  }

  // Dual route for the reported weighted delta: minimize the closed-form
  // ratio by golden section and compare with the grid estimate.
  Grid grid = make_grid(two, 2000, 1e-4);
  DeltaReport dr = estimate_delta(two, sum, grid, Convention::weighted);
  double a = 1e-4, b = 0.5 - 1e-4;
  auto ratio = [&](double x) { return gpw(x) / gw(x); };
  for (int it = 0; it < 200; ++it) {
    const double c = b - (b - a) * 0.6180339887498949;
    const double d = a + (b - a) * 0.6180339887498949;
    if (ratio(c) < ratio(d)) b = d; else a = c;
  }
  const double closed_min = ratio(0.5 * (a + b));
  CHECK(dr.delta_sq_hat == doctest::Approx(closed_min).epsilon(1e-9));
  CHECK(!dr.boundary_infimum);  // interior minimum
  // The ratio climbs back toward one at both ends of the box.
  CHECK(dr.lambda_min.front() > 0.99);
  CHECK(dr.lambda_min[grid.size() - 1] > 0.99);
}

TEST_CASE("refinement never raises the estimated infimum") {
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 101, 1e-4);
  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    DeltaReport flat = estimate_delta(two, sum, grid, conv, 0);
    DeltaReport refined = estimate_delta(two, sum, grid, conv, 2);
    CHECK(refined.delta_sq_hat <= flat.delta_sq_hat + 1e-15);
    CHECK(refined.points.size() > flat.points.size());
  }
}

TEST_CASE("delta estimation: merged categorical is never almost sufficient") {
  auto simplex = make_categorical_simplex(3);
  Statistic merge = Statistic::from_labels(simplex.space_ptr(), make_space({"0", "1"}),
                                           {"0", "1", "1"});
  Grid grid = make_grid(simplex, 25, 1e-4);
  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    DeltaReport r = estimate_delta(simplex, merge, grid, conv);
    CHECK(r.delta_hat <= 1e-9);
    for (double l : r.lambda_min) CHECK(l <= 1e-18);
  }
}

TEST_CASE("delta is invariant under outcome relabeling") {
  auto fwd = make_space({"a", "b", "c", "d"});
  auto rev = make_space({"d", "c", "b", "a"});
  std::vector<const char*> texts{"0.5-x1", "x1", "x1^2", "0.5-x1^2"};
  std::vector<Expr> dens_fwd, dens_rev;
  for (int i = 0; i < 4; ++i) dens_fwd.push_back(Expr::parse(texts[i], 1));
  for (int i = 3; i >= 0; --i) dens_rev.push_back(Expr::parse(texts[i], 1));
  auto m1 = make_expr_model(fwd, counting_measure(fwd), 1, {{0.0, 0.5}}, false,
                            std::move(dens_fwd), "fwd");
  auto m2 = make_expr_model(rev, counting_measure(rev), 1, {{0.0, 0.5}}, false,
                            std::move(dens_rev), "rev");
  auto target = make_space({"0", "1", "2"});
  Statistic k1 = Statistic::from_labels(fwd, target, {"0", "1", "1", "2"});
  Statistic k2 = Statistic::from_labels(rev, target, {"2", "1", "1", "0"});
  Grid g1 = make_grid(m1, 101, 1e-4);
  DeltaReport r1 = estimate_delta(m1, k1, g1, Convention::unweighted);
  DeltaReport r2 = estimate_delta(m2, k2, g1, Convention::unweighted);
  CHECK(std::fabs(r1.delta_sq_hat - r2.delta_sq_hat) <= 1e-12);
}

TEST_CASE("coarser statistics never raise delta (weighted)") {
  std::mt19937_64 rng(123);
  for (int rep = 0; rep < 10; ++rep) {
    auto model = testing::random_model(rng, 5 + rep % 3, 1);
    auto k1 = testing::random_statistic(rng, model.space_ptr(), 4);
    auto k2 = testing::random_statistic(rng, k1.target_ptr(), 3);
    Statistic chained = compose(k2, k1);
    Grid grid = make_grid(model, 21, 1e-3);
    DeltaReport first = estimate_delta(model, k1, grid, Convention::weighted, 0);
    DeltaReport both = estimate_delta(model, chained, grid, Convention::weighted, 0);
    CHECK(both.delta_sq_hat <= first.delta_sq_hat + 1e-9);
  }
}

TEST_CASE("weighted ratio stays within [0, 1]") {
  std::mt19937_64 rng(321);
  for (int rep = 0; rep < 15; ++rep) {
    auto model = testing::random_model(rng, 3 + rep % 6, 1);
    auto kappa = testing::random_statistic(rng, model.space_ptr(), 4);
    Grid grid = make_grid(model, 15, 1e-3);
    DeltaReport r = estimate_delta(model, kappa, grid, Convention::weighted, 0);
    for (double l : r.lambda_min) {
      CHECK(l >= 0.0);
      CHECK(l <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("pythagoras identity for the conditional expectation") {
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  std::vector<double> v{1.0};

  auto ident = identity_statistic(two.space_ptr());
  std::vector<double> quarter{0.25};
  CHECK(pythagoras_residual(two, ident, quarter, v) == 0.0);

  auto pc = pythagoras_check(two, sum, quarter, v);
  CHECK(pc.residual <= 1e-10 * pc.phi_norm_sq);

  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 20; ++rep) {
    auto model = testing::random_model(rng, 6, 2);
    auto kappa = testing::random_statistic(rng, model.space_ptr(), 3);
    std::vector<double> dir{1.0, -0.5};
    auto xi = testing::random_interior_point(rng, 2);
    auto check = pythagoras_check(model, kappa, xi, dir);
    CHECK(check.residual <= 1e-10 * check.phi_norm_sq);
  }
}

TEST_CASE("condition (ii): derivative bound") {
  auto coin = make_coin_block(2, 1);
  Statistic heads = bit_sum_statistic(coin.space_ptr());
  Grid coin_grid = make_grid(coin, 21, 1e-3);
  ConditionIIReport suff =
      check_condition_ii(coin, heads, coin_grid, 1.0, Convention::weighted);
  CHECK(suff.holds);  // log(p / kappa*p') is constant in xi

  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 301, 1e-4);
  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    DeltaReport dr = estimate_delta(two, sum, grid, conv);
    ConditionIIReport ii = check_condition_ii(two, sum, grid, dr.delta_hat, conv);
    CHECK(ii.holds);
  }
  // Pushing delta above delta_hat breaks the weighted bound somewhere.
  DeltaReport dw = estimate_delta(two, sum, grid, Convention::weighted);
  ConditionIIReport probe = check_condition_ii(
      two, sum, grid, std::min(1.0, dw.delta_hat + 0.05), Convention::weighted);
  CHECK(!probe.holds);

  CHECK_THROWS_AS(check_condition_ii(two, sum, grid, 0.0, Convention::weighted),
                  ConfigError);
  CHECK_THROWS_AS(check_condition_ii(two, sum, grid, 1.5, Convention::weighted),
                  ConfigError);
}

TEST_CASE("Riemannian distance") {
  auto coin = make_coin_block(1, 1);
  std::vector<double> a{0.25}, b{0.75};
  const double d = riemannian_distance(coin, a, b, Convention::weighted);
  CHECK(std::fabs(d - std::numbers::pi / 3.0) <= 1e-6);
  CHECK(riemannian_distance(coin, a, a, Convention::weighted) == 0.0);

  // Flat synthetic metric: p = ((x+2)/2)^2 on a single outcome gives
  // (p')^2 / p = 1 identically.
  auto space = make_space({"only"});
  auto flat = make_expr_model(space, counting_measure(space), 1, {{0.0, 1.0}}, false,
                              {Expr::parse("((x1+2)/2)^2", 1)}, "flat");
  std::vector<double> x{0.1}, y{0.4};
  CHECK(std::fabs(riemannian_distance(flat, x, y, Convention::weighted) - 0.3) <= 1e-9);

  std::vector<double> outside{1.5};
  CHECK_THROWS_AS(riemannian_distance(coin, a, outside, Convention::weighted),
                  DomainError);
}

TEST_CASE("distance tables are symmetric and triangle-consistent") {
  auto coin = make_coin_block(1, 1);
  DistanceTable t = distance_table(coin, {{0.2}, {0.35}, {0.5}, {0.8}},
                                   Convention::weighted);
  CHECK(t.method == "exact-1d-quadrature");
  const std::size_t k = t.points.size();
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(t.at(i, i) == 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(t.at(i, j) == t.at(j, i));
      for (std::size_t l = 0; l < k; ++l)
        CHECK(t.at(i, j) <= t.at(i, l) + t.at(l, j) + 1e-9);
    }
  }
}

TEST_CASE("lattice distance approximates a flat plane within octile bias") {
  // Two outcomes with p1 = exp(x1), p2 = exp(x2): the unweighted form is the
  // identity matrix, so the true distance is Euclidean. The 8-neighbor path
  // overshoots by at most sec(pi/8) ~ 1.0824.
  auto space = make_space({"e1", "e2"});
  std::vector<Expr> dens{Expr::parse("exp(x1)", 2), Expr::parse("exp(x2)", 2)};
  auto flat2 = make_expr_model(space, counting_measure(space), 2,
                               {{0.0, 1.0}, {0.0, 1.0}}, false, std::move(dens),
                               "flat2");
  std::vector<double> a{0.2, 0.2}, b{0.5, 0.6};
  const double euclid = 0.5;
  const std::size_t res = 48;
  const double d = riemannian_distance(flat2, a, b, Convention::unweighted, res);
  CHECK(d >= euclid - 1e-6);
  // Octile path length for the displacement plus endpoint-snapping slack.
  const double dx = 0.3, dy = 0.4;
  const double octile = (dy - dx) + dx * std::numbers::sqrt2;
  const double step = (1.0 - 2e-4) / static_cast<double>(res - 1);
  CHECK(d <= octile + 3.0 * step * std::numbers::sqrt2);
}

TEST_CASE("distance tables on a surface grid") {
  auto simplex = make_categorical_simplex(3);
  DistanceTable t = distance_table(
      simplex, {{0.25, 0.25}, {0.4, 0.3}, {0.3, 0.45}}, Convention::weighted, 16);
  CHECK(t.method == "grid-graph-shortest-path");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.at(i, i) == 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(t.at(i, j) == t.at(j, i));
      CHECK((i == j || t.at(i, j) > 0.0));
      for (std::size_t l = 0; l < 3; ++l)
        CHECK(t.at(i, j) <= t.at(i, l) + t.at(l, j) + 1e-9);
    }
  }
}

TEST_CASE("Lipschitz difference quotients") {
  auto coin = make_coin_block(2, 2);
  Statistic heads = bit_sum_statistic(coin.space_ptr());
  Grid coin_grid = make_grid(coin, 51, 1e-3);
  CHECK(lipschitz_estimate(coin, heads, coin_grid, Convention::weighted).estimate <=
        1e-12);
  CHECK(lipschitz_estimate(coin, identity_statistic(coin.space_ptr()), coin_grid,
                           Convention::weighted)
            .estimate <= 1e-12);

  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 2001, 1e-4);
  DeltaReport dr = estimate_delta(two, sum, grid, Convention::unweighted);
  LipschitzReport lip = lipschitz_estimate(two, sum, grid, Convention::unweighted);
  CHECK(lip.estimate <= std::sqrt(1.0 - dr.delta_sq_hat) + 1e-6);
}

TEST_CASE("canonical factorization") {
  auto coin = make_coin_block(1, 2);
  Statistic block = block_statistic(1, 2);
  Factorization f = canonical_factorization(coin, block);
  for (double x : {0.1, 0.3, 0.6, 0.9}) {
    std::vector<double> xi{x};
    // t("01") = xi (1-xi) / ((1 - xi^2)/3) = 3 xi / (1 + xi)
    const double t = f.t(coin.space().index_of("01"), xi);
    CHECK(t == doctest::Approx(3.0 * x / (1.0 + x)).epsilon(1e-13));
  }

  // Heads count: t does not depend on xi.
  auto coin22 = make_coin_block(2, 2);
  Statistic heads = bit_sum_statistic(coin22.space_ptr());
  Factorization fh = canonical_factorization(coin22, heads);
  std::vector<double> xa{0.2}, xb{0.7};
  for (std::size_t w = 0; w < coin22.space().size(); ++w)
    CHECK(std::fabs(fh.t(w, xa) - fh.t(w, xb)) <= 1e-12);

  // Identity: t is one.
  Factorization fi = canonical_factorization(coin22, identity_statistic(coin22.space_ptr()));
  for (std::size_t w = 0; w < coin22.space().size(); ++w)
    CHECK(fi.t(w, xa) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("condition (iv): factorization checks") {
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 501, 1e-4);

  for (Convention conv : {Convention::weighted, Convention::unweighted}) {
    DeltaReport dr = estimate_delta(two, sum, grid, conv);
    Factorization canonical = canonical_factorization(two, sum);
    ConditionIVReport r =
        check_condition_iv(two, sum, canonical, grid, dr.delta_hat, conv);
    CHECK(r.holds);
    CHECK(r.chain_residual_max <= 1e-9);
  }

  // Negative control: s = 1, t = p reconstructs but fails the Lipschitz
  // bound (log p itself moves as fast as the metric allows).
  DeltaReport du = estimate_delta(two, sum, grid, Convention::unweighted);
  Factorization flat;
  flat.s = [](std::size_t, std::span<const double>) { return 1.0; };
  ParametrizedModel model_copy = two;
  flat.t = [model_copy](std::size_t w, std::span<const double> xi) {
    return model_copy.density_grad(w, xi).value;
  };
  ConditionIVReport r =
      check_condition_iv(two, sum, flat, grid, du.delta_hat, Convention::unweighted);
  CHECK(!r.lipschitz_ok);

  // Sufficient statistic at delta = 1: the bound is zero and holds.
  auto coin = make_coin_block(2, 1);
  Statistic heads = bit_sum_statistic(coin.space_ptr());
  Grid coin_grid = make_grid(coin, 51, 1e-3);
  Factorization fc = canonical_factorization(coin, heads);
  ConditionIVReport rs =
      check_condition_iv(coin, heads, fc, coin_grid, 1.0, Convention::weighted);
  CHECK(rs.holds);
  CHECK(rs.lipschitz_bound == 0.0);

  // Broken reconstruction raises a factorization error naming the points.
  Factorization broken;
  broken.s = [](std::size_t, std::span<const double>) { return 1.0; };
  broken.t = [](std::size_t, std::span<const double>) { return 1.0; };
  CHECK_THROWS_AS(
      check_condition_iv(two, sum, broken, grid, 0.5, Convention::weighted),
      FactorizationError);
}
