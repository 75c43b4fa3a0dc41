#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "suffstat/errors.hpp"

namespace suffstat {

// Value together with its exact gradient in the model parameters,
// propagated by forward-mode dual arithmetic. grad.size() is the
// parameter dimension d.
struct DualVector {
  double value = 0.0;
  std::vector<double> grad;

  std::size_t dim() const { return grad.size(); }
};

inline DualVector dual_constant(std::size_t dim, double v) {
  return DualVector{v, std::vector<double>(dim, 0.0)};
}

inline DualVector dual_variable(std::size_t dim, std::size_t index, double v) {
  DualVector d{v, std::vector<double>(dim, 0.0)};
  d.grad[index] = 1.0;
  return d;
}

inline DualVector dual_add(const DualVector& a, const DualVector& b) {
  DualVector r{a.value + b.value, a.grad};
  for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] += b.grad[i];
  return r;
}

inline DualVector dual_sub(const DualVector& a, const DualVector& b) {
  DualVector r{a.value - b.value, a.grad};
  for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] -= b.grad[i];
  return r;
}

inline DualVector dual_neg(const DualVector& a) {
  DualVector r{-a.value, a.grad};
  for (double& g : r.grad) g = -g;
  return r;
}

inline DualVector dual_mul(const DualVector& a, const DualVector& b) {
  DualVector r{a.value * b.value, std::vector<double>(a.grad.size())};
  for (std::size_t i = 0; i < r.grad.size(); ++i)
    r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  return r;
}

inline DualVector dual_div(const DualVector& a, const DualVector& b) {
  if (b.value == 0.0) throw DomainError("division by zero");
  DualVector r{a.value / b.value, std::vector<double>(a.grad.size())};
  const double inv = 1.0 / b.value;
  for (std::size_t i = 0; i < r.grad.size(); ++i)
    r.grad[i] = (a.grad[i] - r.value * b.grad[i]) * inv;
  return r;
}

inline DualVector dual_exp(const DualVector& a) {
  const double e = std::exp(a.value);
  DualVector r{e, a.grad};
  for (double& g : r.grad) g *= e;
  return r;
}

inline DualVector dual_log(const DualVector& a) {
  if (!(a.value > 0.0))
    throw DomainError("log of non-positive value " + std::to_string(a.value));
  DualVector r{std::log(a.value), a.grad};
  const double inv = 1.0 / a.value;
  for (double& g : r.grad) g *= inv;
  return r;
}

inline DualVector dual_sqrt(const DualVector& a) {
  if (!(a.value > 0.0))
    throw DomainError("sqrt of non-positive value " + std::to_string(a.value));
  const double s = std::sqrt(a.value);
  DualVector r{s, a.grad};
  const double half_inv = 0.5 / s;
  for (double& g : r.grad) g *= half_inv;
  return r;
}

// Integer exponent: repeated multiplication, so negative bases stay exact.
inline DualVector dual_pow_int(const DualVector& a, long long k) {
  const std::size_t dim = a.grad.size();
  if (k < 0) return dual_div(dual_constant(dim, 1.0), dual_pow_int(a, -k));
  DualVector r = dual_constant(dim, 1.0);
  for (long long i = 0; i < k; ++i) r = dual_mul(r, a);
  return r;
}

// General exponent; a gradient-free integer exponent up to 10^6 takes the
// exact path, anything else requires a positive base.
inline DualVector dual_pow(const DualVector& a, const DualVector& b) {
  bool const_exponent = true;
  for (double g : b.grad)
    if (g != 0.0) const_exponent = false;
  if (const_exponent && std::nearbyint(b.value) == b.value &&
      std::fabs(b.value) <= 1e6) {
    return dual_pow_int(a, static_cast<long long>(b.value));
  }
  if (!(a.value > 0.0))
    throw DomainError("power with non-integer exponent requires positive base, got " +
                      std::to_string(a.value));
  const double lv = std::log(a.value);
  const double v = std::exp(b.value * lv);
  DualVector r{v, std::vector<double>(a.grad.size())};
  for (std::size_t i = 0; i < r.grad.size(); ++i)
    r.grad[i] = v * (b.grad[i] * lv + b.value * a.grad[i] / a.value);
  return r;
}

}  // namespace suffstat
