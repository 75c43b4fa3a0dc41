#include "suffstat/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "suffstat/errors.hpp"

namespace suffstat {

double SmallMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += at(i, i);
  return t;
}

std::vector<double> sym_eigenvalues(SmallMatrix m) {
  const std::size_t n = m.n;
  if (n == 1) return {m.at(0, 0)};

  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return std::vector<double>(n, 0.0);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
    if (off <= scale * scale * 1e-32) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m.at(p, q);
        if (std::fabs(apq) <= scale * 1e-18) continue;
        const double app = m.at(p, p);
        const double aqq = m.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = m.at(k, p);
          const double akq = m.at(k, q);
          m.at(k, p) = c * akp - s * akq;
          m.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = m.at(p, k);
          const double aqk = m.at(q, k);
          m.at(p, k) = c * apk - s * aqk;
          m.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = m.at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

bool cholesky_lower(SmallMatrix& m) {
  const std::size_t n = m.n;
  for (std::size_t j = 0; j < n; ++j) {
    double d = m.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= m.at(j, k) * m.at(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    m.at(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m.at(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= m.at(i, k) * m.at(j, k);
      m.at(i, j) = v / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = 0.0;
  return true;
}

std::vector<double> forward_substitute(const SmallMatrix& l, std::span<const double> b) {
  const std::size_t n = l.n;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= l.at(i, k) * y[k];
    y[i] = v / l.at(i, i);
  }
  return y;
}

SmallMatrix congruence_reduce(const SmallMatrix& l, const SmallMatrix& a) {
  const std::size_t n = l.n;
  // X = L^-1 A  (solve column-wise), then B = X L^-T row-wise.
  SmallMatrix x(n);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = a.at(i, j);
    auto y = forward_substitute(l, col);
    for (std::size_t i = 0; i < n; ++i) x.at(i, j) = y[i];
  }
  SmallMatrix b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) col[k] = x.at(i, k);
    auto y = forward_substitute(l, col);  // row of X times L^-T
    for (std::size_t j = 0; j < n; ++j) b.at(i, j) = y[j];
  }
  // Symmetrize against rounding drift.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (b.at(i, j) + b.at(j, i));
      b.at(i, j) = v;
      b.at(j, i) = v;
    }
  return b;
}

double determinant(SmallMatrix m) {
  const std::size_t n = m.n;
  if (n == 1) return m.at(0, 0);
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m.at(r, col)) > std::fabs(m.at(pivot, col))) pivot = r;
    if (m.at(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m.at(pivot, c), m.at(col, c));
      det = -det;
    }
    det *= m.at(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m.at(r, col) / m.at(col, col);
      for (std::size_t c = col; c < n; ++c) m.at(r, c) -= f * m.at(col, c);
    }
  }
  return det;
}

}  // namespace suffstat
