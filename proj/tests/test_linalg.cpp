#include <doctest.h>

#include <cmath>

#include "suffstat/linalg.hpp"

using namespace suffstat;

namespace {

SmallMatrix make2(double a, double b, double c, double d) {
  SmallMatrix m(2);
  m.at(0, 0) = a;
  m.at(0, 1) = b;
  m.at(1, 0) = c;
  m.at(1, 1) = d;
  return m;
}

}  // namespace

TEST_CASE("symmetric eigenvalues") {
  auto ev2 = sym_eigenvalues(make2(2, 1, 1, 2));
  CHECK(ev2[0] == doctest::Approx(1.0));
  CHECK(ev2[1] == doctest::Approx(3.0));

  SmallMatrix diag(3);
  diag.at(0, 0) = 5;
  diag.at(1, 1) = -1;
  diag.at(2, 2) = 2;
  auto ev = sym_eigenvalues(diag);
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(2.0));
  CHECK(ev[2] == doctest::Approx(5.0));

  SmallMatrix zero(4);
  for (double v : sym_eigenvalues(zero)) CHECK(v == 0.0);

  // Rank-one 3x3: eigenvalues {0, 0, |v|^2}.
  SmallMatrix r1(3);
  const double v[3] = {1.0, 2.0, 3.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r1.at(i, j) = v[i] * v[j];
  ev = sym_eigenvalues(r1);
  CHECK(std::fabs(ev[0]) <= 1e-12);
  CHECK(std::fabs(ev[1]) <= 1e-12);
  CHECK(ev[2] == doctest::Approx(14.0));
}

TEST_CASE("cholesky factorization and reduction") {
  SmallMatrix a = make2(4, 2, 2, 3);
  SmallMatrix l = a;
  REQUIRE(cholesky_lower(l));
  // L L^T == A
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 2; ++k) s += l.at(i, k) * l.at(j, k);
      CHECK(s == doctest::Approx(a.at(i, j)).epsilon(1e-14));
    }

  // Reducing A by its own factor gives the identity.
  SmallMatrix b = congruence_reduce(l, a);
  CHECK(b.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.at(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::fabs(b.at(0, 1)) <= 1e-14);

  SmallMatrix not_pd = make2(1, 2, 2, 1);
  CHECK(!cholesky_lower(not_pd));
}

TEST_CASE("determinant") {
  CHECK(determinant(make2(2, 1, 1, 2)) == doctest::Approx(3.0));
  SmallMatrix m(3);
  m.at(0, 0) = 1;
  m.at(0, 1) = 2;
  m.at(0, 2) = 3;
  m.at(1, 0) = 4;
  m.at(1, 1) = 5;
  m.at(1, 2) = 6;
  m.at(2, 0) = 7;
  m.at(2, 1) = 8;
  m.at(2, 2) = 10;
  CHECK(determinant(m) == doctest::Approx(-3.0));
  SmallMatrix s(1);
  s.at(0, 0) = 7.5;
  CHECK(determinant(s) == 7.5);
}
