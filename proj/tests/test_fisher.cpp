#include <doctest.h>

#include <cmath>
#include <random>

#include "suffstat/coin_closed.hpp"
#include "suffstat/fisher.hpp"
#include "support/generators.hpp"

using namespace suffstat;

TEST_CASE("log derivatives") {
  auto coin = make_coin_block(1, 1);
  std::vector<double> quarter{0.25};
  auto derivs = log_derivative(coin, quarter);
  CHECK(derivs[coin.space().index_of("1")].grad_log[0] == doctest::Approx(4.0));

  auto two = make_two_coin_dependent();
  derivs = log_derivative(two, quarter);
  CHECK(derivs[two.space().index_of("10")].grad_log[0] == doctest::Approx(8.0));

  auto simplex = make_categorical_simplex(3);
  std::vector<double> xi{0.2, 0.3};
  derivs = log_derivative(simplex, xi);
  CHECK(derivs[2].grad_log[0] == doctest::Approx(-2.0));
  CHECK(derivs[2].grad_log[1] == doctest::Approx(-2.0));
}

TEST_CASE("Fisher matrices") {
  auto coin = make_coin_block(1, 1);
  std::vector<double> half{0.5};
  CHECK(fisher_matrix(coin, half, Convention::weighted).at(0, 0) ==
        doctest::Approx(4.0).epsilon(1e-14));
  std::vector<double> p3{0.3};
  CHECK(fisher_matrix(coin, p3, Convention::weighted).at(0, 0) ==
        doctest::Approx(1.0 / (0.3 * 0.7)).epsilon(1e-13));

  auto two = make_two_coin_dependent();
  std::vector<double> quarter{0.25};
  CHECK(fisher_matrix(two, quarter, Convention::unweighted).at(0, 0) ==
        doctest::Approx(4768.0 / 49.0).epsilon(1e-14));
}

TEST_CASE("Fisher matrix is invariant under outcome relabeling") {
  // Same densities listed in a different outcome order.
  auto fwd = make_space({"a", "b", "c"});
  auto rev = make_space({"c", "b", "a"});
  std::vector<Expr> dens_fwd{Expr::parse("0.5+0.3*x1", 1), Expr::parse("0.8-0.2*x1", 1),
                             Expr::parse("0.6+0.1*x1^2", 1)};
  std::vector<Expr> dens_rev{Expr::parse("0.6+0.1*x1^2", 1), Expr::parse("0.8-0.2*x1", 1),
                             Expr::parse("0.5+0.3*x1", 1)};
  auto m1 = make_expr_model(fwd, FiniteMeasure(fwd, {1.0, 2.0, 0.5}), 1, {{0.0, 1.0}},
                            false, std::move(dens_fwd), "fwd");
  auto m2 = make_expr_model(rev, FiniteMeasure(rev, {0.5, 2.0, 1.0}), 1, {{0.0, 1.0}},
                            false, std::move(dens_rev), "rev");
  for (double x : {0.2, 0.5, 0.8}) {
    std::vector<double> xi{x};
    for (Convention conv : {Convention::weighted, Convention::unweighted}) {
      const double a = fisher_matrix(m1, xi, conv).at(0, 0);
      const double b = fisher_matrix(m2, xi, conv).at(0, 0);
      CHECK(std::fabs(a - b) <= 1e-12 * a);
    }
  }
}

TEST_CASE("information loss") {
  auto two = make_two_coin_dependent();
  std::vector<double> quarter{0.25};
  std::vector<double> v{1.0};

  CHECK(information_loss(two, identity_statistic(two.space_ptr()), quarter, v,
                         Convention::weighted) == 0.0);

  // Subtracting the displayed closed forms gives
  // (-3 xi^2 + 2 xi + 3) / (xi^2 (xi+1)^2) = 848/25 at xi = 1/4,
  // confirmed by direct summation.
  Statistic sum = bit_sum_statistic(two.space_ptr());
  const double loss =
      information_loss(two, sum, quarter, v, Convention::unweighted);
  CHECK(loss == doctest::Approx(33.92).epsilon(1e-13));
  const double xi = 0.25;
  const double poly = (-3 * xi * xi + 2 * xi + 3) / (xi * xi * (xi + 1) * (xi + 1));
  CHECK(loss == doctest::Approx(poly).epsilon(1e-13));

  // Heads count on the coin model loses nothing.
  auto coin = make_coin_block(2, 2);
  Statistic heads = bit_sum_statistic(coin.space_ptr());
  for (double x : {0.2, 0.5, 0.7}) {
    std::vector<double> pt{x};
    const double g = fisher_matrix(coin, pt, Convention::weighted).at(0, 0);
    const double l = information_loss(coin, heads, pt, v, Convention::weighted);
    CHECK(std::fabs(l) <= 1e-10 * g);
  }
}

TEST_CASE("monotonicity sweeps") {
  auto two = make_two_coin_dependent();
  Statistic sum = bit_sum_statistic(two.space_ptr());
  Grid grid = make_grid(two, 100, 1e-4);

  MonotonicityReport weighted = check_monotonicity(two, sum, grid, Convention::weighted);
  CHECK(weighted.holds);
  CHECK(weighted.violations == 0);

  // The unweighted loss (-3 xi^2 + 2 xi + 3)/(xi^2 (xi+1)^2) is positive on
  // (0, 1/2), so this sweep reports no violations either.
  MonotonicityReport unweighted =
      check_monotonicity(two, sum, grid, Convention::unweighted);
  CHECK(unweighted.violations == 0);

  MonotonicityReport ident = check_monotonicity(
      two, identity_statistic(two.space_ptr()), grid, Convention::weighted);
  CHECK(ident.holds);
  CHECK(ident.worst_excess <= 0.0);
}

TEST_CASE("weighted coin Fisher information is mn/(xi(1-xi))") {
  for (auto [m, n] : {std::pair{1, 2}, {2, 2}, {3, 2}, {2, 3}}) {
    auto coin = make_coin_block(m, n);
    for (double x : {0.15, 0.5, 0.85}) {
      std::vector<double> pt{x};
      const double g = fisher_matrix(coin, pt, Convention::weighted).at(0, 0);
      const double expected = coin_block_g_weighted(m, n, x);
      CHECK(std::fabs(g - expected) <= 1e-10 * expected);
    }
  }
}

TEST_CASE("weighted Gram matrices are positive semidefinite on the grid") {
  std::mt19937_64 rng(65537);
  for (int rep = 0; rep < 12; ++rep) {
    auto model = testing::random_model(rng, 3 + rep % 5, 1 + rep % 2);
    Grid grid = make_grid(model, 9, 1e-3);
    for (const auto& pt : grid.points) {
      MetricMatrix g = fisher_matrix(model, pt, Convention::weighted);
      const auto ev = sym_eigenvalues(g.entries);
      CHECK(ev.front() >= -1e-10 * g.trace());
      // Symmetric by construction.
      for (std::size_t i = 0; i < g.dim; ++i)
        for (std::size_t j = 0; j < g.dim; ++j)
          CHECK(std::fabs(g.at(i, j) - g.at(j, i)) <= 1e-12);
    }
  }
}

TEST_CASE("pullback norm equals the induced-space norm") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    auto model = testing::random_model(rng, 3 + rep % 5, 1);
    auto kappa = testing::random_statistic(rng, model.space_ptr(), 3);
    ParametrizedModel induced = induced_model(model, kappa);
    auto xi = testing::random_interior_point(rng, 1);
    for (Convention conv : {Convention::weighted, Convention::unweighted}) {
      // Sum over the source space of the pulled-back squared derivative.
      auto derivs = log_derivative(model, xi);
      auto derivs_p = log_derivative(induced, xi);
      double pullback = 0.0;
      for (std::size_t w = 0; w < model.space().size(); ++w) {
        const double mu = model.base().weight(w);
        const double weight =
            conv == Convention::weighted ? derivs[w].density * mu : mu;
        const double f = derivs_p[kappa.apply(w)].grad_log[0];
        pullback += f * f * weight;
      }
      const double direct = fisher_matrix(induced, xi, conv).at(0, 0);
      CHECK(std::fabs(pullback - direct) <= 1e-12 * std::max(1.0, direct));
    }
  }
}

TEST_CASE("grouped coin evaluators match explicit enumeration") {
  for (auto [m, n] : {std::pair{2, 2}, {2, 3}, {3, 2}}) {
    auto coin = make_coin_block(m, n);
    Statistic block = block_statistic(m, n);
    ParametrizedModel induced = induced_model(coin, block);
    for (Convention conv : {Convention::weighted, Convention::unweighted}) {
      auto grouped = coin_block_pair_evaluator(m, n, CoinStatisticKind::block, conv);
      for (double x : {0.12, 0.5, 0.88}) {
        std::vector<double> pt{x};
        auto [g, gp] = grouped(pt);
        const double ge = fisher_matrix(coin, pt, conv).at(0, 0);
        const double gpe = fisher_matrix(induced, pt, conv).at(0, 0);
        CHECK(std::fabs(g.at(0, 0) - ge) <= 1e-12 * ge);
        CHECK(std::fabs(gp.at(0, 0) - gpe) <= 1e-12 * gpe);
      }
    }
  }
}

TEST_CASE("grouped coin forms match the closed-form polynomials at mn = 18") {
  const int m = 3, n = 6;
  auto eval = coin_block_pair_evaluator(m, n, CoinStatisticKind::block,
                                        Convention::unweighted);
  for (double x : {0.1, 0.35, 0.6, 0.9}) {
    std::vector<double> pt{x};
    auto [g, gp] = eval(pt);
    CHECK(std::fabs(g.at(0, 0) - coin_block_g_unweighted(m, n, x)) <=
          1e-11 * coin_block_g_unweighted(m, n, x));
    CHECK(std::fabs(gp.at(0, 0) - coin_block_gp_unweighted(m, n, x)) <=
          1e-11 * coin_block_gp_unweighted(m, n, x));
  }
}
