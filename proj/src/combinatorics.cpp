#include "suffstat/combinatorics.hpp"

#include <algorithm>
#include <cmath>

#include "suffstat/errors.hpp"

namespace suffstat {

BigUint::BigUint(std::uint64_t v) {
  while (v != 0) {
    limbs_.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    v >>= 32;
  }
}

void BigUint::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

BigUint BigUint::pow2(unsigned n) {
  BigUint r;
  r.limbs_.assign(n / 32 + 1, 0);
  r.limbs_.back() = 1u << (n % 32);
  return r;
}

BigUint BigUint::ipow(const BigUint& base, unsigned e) {
  BigUint r(1);
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

BigUint BigUint::binomial(unsigned n, unsigned k) {
  if (k > n) return BigUint(0);
  k = std::min(k, n - k);
  // Row of Pascal's triangle; all intermediates stay integral.
  std::vector<BigUint> row(k + 1);
  row[0] = BigUint(1);
  for (unsigned i = 1; i <= n; ++i) {
    for (unsigned j = std::min(i, static_cast<unsigned>(k)); j >= 1; --j)
      row[j] += row[j - 1];
  }
  return row[k];
}

BigUint BigUint::from_decimal(const std::string& text) {
  if (text.empty()) throw ConfigError("empty decimal literal");
  BigUint r;
  for (char c : text) {
    if (c < '0' || c > '9') throw ConfigError("bad decimal digit in big integer");
    r = r * BigUint(10) + BigUint(static_cast<std::uint64_t>(c - '0'));
  }
  return r;
}

BigUint& BigUint::operator+=(const BigUint& other) {
  const std::size_t n = std::max(limbs_.size(), other.limbs_.size());
  limbs_.resize(n, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t s = carry + limbs_[i];
    if (i < other.limbs_.size()) s += other.limbs_[i];
    limbs_[i] = static_cast<std::uint32_t>(s & 0xffffffffu);
    carry = s >> 32;
  }
  if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
  return *this;
}

BigUint BigUint::operator*(const BigUint& other) const {
  if (is_zero() || other.is_zero()) return BigUint();
  BigUint r;
  r.limbs_.assign(limbs_.size() + other.limbs_.size(), 0);
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < other.limbs_.size(); ++j) {
      std::uint64_t cur = r.limbs_[i + j] + carry +
                          static_cast<std::uint64_t>(limbs_[i]) * other.limbs_[j];
      r.limbs_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
    }
    std::size_t k = i + other.limbs_.size();
    while (carry) {
      std::uint64_t cur = r.limbs_[k] + carry;
      r.limbs_[k] = static_cast<std::uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
      ++k;
    }
  }
  r.trim();
  return r;
}

bool BigUint::operator<(const BigUint& other) const {
  if (limbs_.size() != other.limbs_.size()) return limbs_.size() < other.limbs_.size();
  for (std::size_t i = limbs_.size(); i-- > 0;)
    if (limbs_[i] != other.limbs_[i]) return limbs_[i] < other.limbs_[i];
  return false;
}

std::string BigUint::to_string() const {
  if (is_zero()) return "0";
  std::vector<std::uint32_t> work = limbs_;
  std::string out;
  while (!work.empty()) {
    // Divide by 1e9, collecting the remainder as the next digit group.
    std::uint64_t rem = 0;
    for (std::size_t i = work.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | work[i];
      work[i] = static_cast<std::uint32_t>(cur / 1000000000u);
      rem = cur % 1000000000u;
    }
    while (!work.empty() && work.back() == 0) work.pop_back();
    std::string group = std::to_string(rem);
    if (!work.empty()) group.insert(0, 9 - group.size(), '0');
    out.insert(0, group);
  }
  return out;
}

std::uint64_t BigUint::to_uint64() const {
  if (limbs_.size() > 2) throw ConfigError("big integer does not fit in 64 bits");
  std::uint64_t v = 0;
  if (limbs_.size() > 1) v = static_cast<std::uint64_t>(limbs_[1]) << 32;
  if (!limbs_.empty()) v |= limbs_[0];
  return v;
}

std::pair<BigUint, BigUint> binomial_moment(int n, int k) {
  if (n < 0 || n > 64) throw ConfigError("binomial moment needs 0 <= N <= 64");
  if (k < 0 || k > 2) throw ConfigError("binomial moment needs k in {0,1,2}");
  const unsigned un = static_cast<unsigned>(n);

  BigUint brute(0);
  for (unsigned s = 0; s <= un; ++s) {
    BigUint term = BigUint::binomial(un, s);
    for (int i = 0; i < k; ++i) term *= BigUint(s);
    brute += term;
  }

  BigUint closed;
  if (k == 0) {
    closed = BigUint::pow2(un);
  } else if (k == 1) {
    closed = un == 0 ? BigUint(0) : BigUint(un) * BigUint::pow2(un - 1);
  } else {
    if (un == 0)
      closed = BigUint(0);
    else if (un == 1)
      closed = BigUint(1);
    else
      closed = BigUint(un) * BigUint(un + 1) * BigUint::pow2(un - 2);
  }
  return {brute, closed};
}

BlockMomentReport block_moment(int m, int n, int k) {
  if (m < 1 || m > 8 || n < 1 || n > 8)
    throw ConfigError("block moment needs 1 <= m,n <= 8");
  if (k < 0 || k > 2) throw ConfigError("block moment needs k in {0,1,2}");
  const unsigned um = static_cast<unsigned>(m);
  const unsigned un = static_cast<unsigned>(n);

  BigUint two_n_minus_1 = BigUint(BigUint::pow2(un).to_uint64() - 1);

  BigUint brute(0);
  for (unsigned l = 0; l <= um; ++l) {
    BigUint term = BigUint::binomial(um, l) * BigUint::ipow(two_n_minus_1, um - l);
    for (int i = 0; i < k; ++i) term *= BigUint(l);
    brute += term;
  }

  BigUint displayed, corrected;
  if (k == 0) {
    displayed = BigUint::pow2(um * un);
    corrected = displayed;
  } else if (k == 1) {
    displayed = BigUint::pow2((um - 1) * un);
    corrected = BigUint(um) * BigUint::pow2((um - 1) * un);
  } else {
    // m (2^n + m - 1) 2^((m-2)n); for m = 1 the exponent is negative and the
    // value collapses to 1 exactly.
    if (um == 1) {
      displayed = BigUint(1);
    } else {
      displayed = BigUint(um) * (BigUint::pow2(un) + BigUint(um - 1)) *
              BigUint::pow2((um - 2) * un);
    }
    corrected = displayed;
  }

  BlockMomentReport report;
  report.m = m;
  report.n = n;
  report.k = k;
  report.brute_force = brute.to_string();
  report.closed_form_displayed = displayed.to_string();
  report.closed_form_corrected = corrected.to_string();
  report.matches_displayed = brute == displayed;
  report.matches_corrected = brute == corrected;
  return report;
}

double coin_bound(int m, int n) {
  if (m < 1 || n < 1) throw ConfigError("coin bound needs m,n >= 1");
  const double q = std::ldexp(1.0, -n);  // 2^-n
  return 4.0 * (1.0 - q) * q /
         (static_cast<double>(n) * (static_cast<double>(m) * n + 1.0));
}

std::vector<MomentIdentityReport> binomial_moment_table(int max_n) {
  std::vector<MomentIdentityReport> out;
  for (int n = 0; n <= max_n; ++n) {
    for (int k = 0; k <= 2; ++k) {
      auto [brute, closed] = binomial_moment(n, k);
      MomentIdentityReport r;
      r.id = "binomial_k" + std::to_string(k);
      r.params = "N=" + std::to_string(n);
      r.brute_force = brute.to_string();
      r.closed_form = closed.to_string();
      r.matches = brute == closed;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<BlockMomentReport> block_moment_table(int max_m, int max_n) {
  std::vector<BlockMomentReport> out;
  for (int m = 1; m <= max_m; ++m)
    for (int n = 1; n <= max_n; ++n)
      for (int k = 0; k <= 2; ++k) out.push_back(block_moment(m, n, k));
  return out;
}

}  // namespace suffstat
