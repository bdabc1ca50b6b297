#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/rng.hpp"

namespace sklab::padic {

namespace detail {
using sklab::detail::require;
}  // namespace detail

inline constexpr int kDefaultPrecision = 32;

inline bool is_prime(std::uint32_t p) {
  if (p < 2) return false;
  for (std::uint32_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline void require_prime(std::uint32_t p) {
  detail::require(is_prime(p) && p < (1u << 16), "p must be a prime below 65536, got " + std::to_string(p));
}

/// Element of Q_p known to finitely many digits:
///   x = p^v * (d_0 + d_1 p + ... + d_{L-1} p^{L-1}),  d_0 != 0,
/// i.e. x is determined modulo p^{v+L}. Zero is exact.
class PadicNumber {
 public:
  static PadicNumber zero(std::uint32_t p) {
    require_prime(p);
    PadicNumber x;
    x.p_ = p;
    return x;
  }

  /// Digits least significant first, starting at p^valuation. Leading
  /// zero digits are absorbed into the valuation; all-zero input is zero.
  static PadicNumber from_digits(std::uint32_t p, std::int64_t valuation, std::vector<std::uint32_t> digits) {
    require_prime(p);
    detail::require(!digits.empty(), "p-adic number needs at least one digit");
    for (auto d : digits) detail::require(d < p, "p-adic digit out of range");
    PadicNumber x;
    x.p_ = p;
    x.valuation_ = valuation;
    x.digits_ = std::move(digits);
    x.normalize();
    return x;
  }

  static PadicNumber from_integer(std::uint32_t p, std::int64_t n, int precision = kDefaultPrecision) {
    require_prime(p);
    detail::require(precision >= 1, "p-adic precision must be at least 1");
    if (n == 0) return zero(p);
    const bool negative = n < 0;
    std::uint64_t u = negative ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
    std::int64_t v = 0;
    while (u % p == 0) {
      u /= p;
      ++v;
    }
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(precision), 0);
    for (auto& d : digits) {
      d = static_cast<std::uint32_t>(u % p);
      u /= p;
    }
    auto x = from_digits(p, v, std::move(digits));
    return negative ? -x : x;
  }

  /// p^k with `precision` digits.
  static PadicNumber power_of_p(std::uint32_t p, std::int64_t k, int precision = kDefaultPrecision) {
    detail::require(precision >= 1, "p-adic precision must be at least 1");
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(precision), 0);
    digits[0] = 1;
    return from_digits(p, k, std::move(digits));
  }

  /// Uniform digits: first in [1, p), the rest in [0, p).
  static PadicNumber random_on_sphere(std::uint32_t p, std::int64_t valuation, int precision, Rng& rng) {
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(precision));
    digits[0] = 1 + static_cast<std::uint32_t>(rng.below(p - 1));
    for (std::size_t i = 1; i < digits.size(); ++i) digits[i] = static_cast<std::uint32_t>(rng.below(p));
    PadicNumber x;
    x.p_ = p;
    x.valuation_ = valuation;
    x.digits_ = std::move(digits);
    return x;
  }

  std::uint32_t prime() const { return p_; }
  bool is_zero() const { return digits_.empty(); }
  /// Valuation; +inf (as int64 max) for zero.
  std::int64_t valuation() const { return is_zero() ? std::numeric_limits<std::int64_t>::max() : valuation_; }
  int precision() const { return static_cast<int>(digits_.size()); }
  const std::vector<std::uint32_t>& digits() const { return digits_; }

  /// x is known modulo p^{absolute_precision}.
  std::int64_t absolute_precision() const {
    return is_zero() ? std::numeric_limits<std::int64_t>::max() : valuation_ + precision();
  }

  /// Coefficient of p^j.
  std::uint32_t digit(std::int64_t j) const {
    if (is_zero()) return 0;
    if (j >= absolute_precision()) throw precision_error("p-adic digit beyond tracked precision");
    if (j < valuation_) return 0;
    return digits_[static_cast<std::size_t>(j - valuation_)];
  }

  /// m with |x| = p^m (i.e. -valuation); undefined for zero.
  std::int64_t norm_exponent() const {
    detail::require(!is_zero(), "norm exponent of zero");
    return -valuation_;
  }

  double norm() const { return is_zero() ? 0.0 : std::pow(static_cast<double>(p_), static_cast<double>(-valuation_)); }

  bool operator==(const PadicNumber&) const = default;

  PadicNumber operator-() const {
    if (is_zero()) return *this;
    PadicNumber y = *this;
    y.digits_[0] = p_ - digits_[0];
    for (std::size_t i = 1; i < digits_.size(); ++i) y.digits_[i] = p_ - 1 - digits_[i];
    return y;
  }

  friend PadicNumber operator+(const PadicNumber& x, const PadicNumber& y) {
    detail::require(x.p_ == y.p_, "p-adic prime mismatch");
    if (x.is_zero()) return y;
    if (y.is_zero()) return x;
    const std::int64_t lo = std::min(x.valuation_, y.valuation_);
    const std::int64_t hi = std::min(x.absolute_precision(), y.absolute_precision());
    std::vector<std::uint32_t> digits(static_cast<std::size_t>(hi - lo));
    std::uint32_t carry = 0;
    for (std::int64_t j = lo; j < hi; ++j) {
      const std::uint32_t s = x.digit(j) + y.digit(j) + carry;
      digits[static_cast<std::size_t>(j - lo)] = s % x.p_;
      carry = s / x.p_;
    }
    PadicNumber z;
    z.p_ = x.p_;
    z.valuation_ = lo;
    z.digits_ = std::move(digits);
    z.normalize();
    return z;
  }

  friend PadicNumber operator-(const PadicNumber& x, const PadicNumber& y) { return x + (-y); }

  friend PadicNumber operator*(const PadicNumber& x, const PadicNumber& y) {
    detail::require(x.p_ == y.p_, "p-adic prime mismatch");
    if (x.is_zero()) return x;
    if (y.is_zero()) return y;
    const std::size_t L = std::min(x.digits_.size(), y.digits_.size());
    std::vector<std::uint32_t> digits(L);
    std::uint64_t carry = 0;
    for (std::size_t k = 0; k < L; ++k) {
      std::uint64_t acc = carry;
      for (std::size_t i = 0; i <= k; ++i)
        acc += static_cast<std::uint64_t>(x.digits_[i]) * y.digits_[k - i];
      digits[k] = static_cast<std::uint32_t>(acc % x.p_);
      carry = acc / x.p_;
    }
    PadicNumber z;
    z.p_ = x.p_;
    z.valuation_ = x.valuation_ + y.valuation_;
    z.digits_ = std::move(digits);
    return z;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string s = std::to_string(p_) + "^" + std::to_string(valuation_) + "*[";
    for (std::size_t i = 0; i < digits_.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(digits_[i]);
    }
    return s + "]";
  }

 private:
  PadicNumber() = default;

  void normalize() {
    std::size_t z = 0;
    while (z < digits_.size() && digits_[z] == 0) ++z;
    if (z == digits_.size()) {
      digits_.clear();
      valuation_ = 0;
      return;
    }
    digits_.erase(digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(z));
    valuation_ += static_cast<std::int64_t>(z);
  }

  std::uint32_t p_ = 2;
  std::int64_t valuation_ = 0;
  std::vector<std::uint32_t> digits_;  // empty <=> zero
};

inline PadicNumber padic_add(const PadicNumber& x, const PadicNumber& y) { return x + y; }
inline PadicNumber padic_mul(const PadicNumber& x, const PadicNumber& y) { return x * y; }
inline PadicNumber padic_neg(const PadicNumber& x) { return -x; }
inline double padic_norm(const PadicNumber& x) { return x.norm(); }

/// x and y coincide at the coarser of their two precisions.
inline bool agree(const PadicNumber& x, const PadicNumber& y) { return (x - y).is_zero(); }

/// Fractional part sum_{v <= j < 0} d_j p^j in [0, 1).
inline double fractional_part(const PadicNumber& x) {
  if (x.is_zero() || x.valuation() >= 0) return 0.0;
  if (x.absolute_precision() < 0)
    throw precision_error("fractional part needs digits below p^0 that are not tracked");
  const auto p = static_cast<double>(x.prime());
  double acc = 0.0;
  for (std::int64_t j = x.valuation(); j < 0; ++j) acc = (acc + x.digit(j)) / p;
  return acc;
}

/// Standard additive character chi(x) = exp(2 pi i {x}_p).
inline std::complex<double> character(const PadicNumber& x) {
  return std::polar(1.0, 2.0 * std::numbers::pi * fractional_part(x));
}

}  // namespace sklab::padic
