#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace suffstat {

// Arbitrary-precision unsigned integer, little-endian base 2^32. Supports
// exactly what the identity checks need: +, *, pow, comparison, decimal IO.
class BigUint {
 public:
  BigUint() = default;
  BigUint(std::uint64_t v);  // NOLINT(google-explicit-constructor)

  static BigUint pow2(unsigned n);
  static BigUint ipow(const BigUint& base, unsigned e);
  static BigUint binomial(unsigned n, unsigned k);
  static BigUint from_decimal(const std::string& text);

  BigUint& operator+=(const BigUint& other);
  friend BigUint operator+(BigUint a, const BigUint& b) { return a += b; }
  BigUint operator*(const BigUint& other) const;
  BigUint& operator*=(const BigUint& other) { return *this = *this * other; }

  bool operator==(const BigUint& other) const { return limbs_ == other.limbs_; }
  bool operator!=(const BigUint& other) const { return !(*this == other); }
  bool operator<(const BigUint& other) const;

  bool is_zero() const { return limbs_.empty(); }
  std::string to_string() const;

  // Exact conversion when the value fits, else throws.
  std::uint64_t to_uint64() const;

 private:
  std::vector<std::uint32_t> limbs_;
  void trim();
};

// Brute force vs closed form for one moment identity; `matches` compares the
// exact integers.
struct MomentIdentityReport {
  std::string id;
  std::string params;
  std::string brute_force;
  std::string closed_form;
  bool matches = false;
};

struct BlockMomentReport {
  int m = 1;
  int n = 1;
  int k = 0;
  std::string brute_force;
  std::string closed_form_displayed;
  std::string closed_form_corrected;
  bool matches_displayed = false;
  bool matches_corrected = false;
};

// sum_s s^k C(N,s) against 2^N, N 2^(N-1), N(N+1) 2^(N-2).
std::pair<BigUint, BigUint> binomial_moment(int n, int k);

// sum_l l^k C(m,l) (2^n-1)^(m-l). The displayed k=1 closed form lacks a
// factor of m for m >= 2; both it and the corrected form m 2^((m-1)n) are
// returned so callers can flag the mismatch.
BlockMomentReport block_moment(int m, int n, int k);

// 4 (1 - 2^-n) 2^-n / (n (mn + 1)) — lower bound for the squared tight delta
// of the per-block "all ones" statistic on the coin model.
double coin_bound(int m, int n);

std::vector<MomentIdentityReport> binomial_moment_table(int max_n);
std::vector<BlockMomentReport> block_moment_table(int max_m, int max_n);

}  // namespace suffstat
