#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace suffstat {

// Small dense square matrix, row-major. Sized for parameter dimensions
// (d <= ~16), not for large systems.
struct SmallMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  SmallMatrix() = default;
  explicit SmallMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  double trace() const;
};

// Eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).
std::vector<double> sym_eigenvalues(SmallMatrix m);

// In-place lower Cholesky factor; false if a pivot is not strictly positive.
bool cholesky_lower(SmallMatrix& m);

// Solves L y = b for lower-triangular L.
std::vector<double> forward_substitute(const SmallMatrix& l, std::span<const double> b);

// B = L^-1 A L^-T for lower-triangular L; A symmetric.
SmallMatrix congruence_reduce(const SmallMatrix& l, const SmallMatrix& a);

double determinant(SmallMatrix m);

}  // namespace suffstat
