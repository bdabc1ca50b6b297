#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/padic/number.hpp"
#include "sklab/rng.hpp"

namespace sklab::padic {

// Haar measure on Q_p normalized by vol(Z_p) = 1 (self-dual for the
// standard character). Radial functions are written on spheres
// S_m = {|x| = p^m}, vol(S_m) = p^m (1 - 1/p).

/// Parameters of f_{t,b}, the density whose Fourier transform is
/// exp(-t |xi|^b).
struct RadialDensitySpec {
  std::uint32_t p = 2;
  double b = 1.0;
  double t = 1.0;
  double tolerance = 1e-14;

  void validate() const {
    require_prime(p);
    detail::require(b > 0.0 && std::isfinite(b), "density: b must be positive");
    detail::require(t > 0.0 && std::isfinite(t), "density: t must be positive");
    detail::require(tolerance > 0.0 && tolerance < 1e-3, "density: tolerance out of range");
  }

  RadialDensitySpec at_time(double time) const {
    RadialDensitySpec s = *this;
    s.t = time;
    return s;
  }
};

inline double ppow(std::uint32_t p, double e) { return std::pow(static_cast<double>(p), e); }

inline double sphere_volume(std::uint32_t p, std::int64_t m) {
  return ppow(p, static_cast<double>(m)) * (1.0 - 1.0 / p);
}

/// Integral over the sphere |xi| = p^gamma of chi(x xi) for |x| = p^m.
inline double sphere_character_integral(std::uint32_t p, std::int64_t m, std::int64_t gamma) {
  if (m <= -gamma) return ppow(p, static_cast<double>(gamma)) * (1.0 - 1.0 / p);
  if (m == -gamma + 1) return -ppow(p, static_cast<double>(gamma - 1));
  return 0.0;
}

namespace detail {

constexpr int kMaxSeriesTerms = 100000;

/// Scale index: t p^{gamma b} ~ 1 near gamma = center.
inline std::int64_t scale_index(const RadialDensitySpec& s) {
  return static_cast<std::int64_t>(std::floor(-std::log(s.t) / (s.b * std::log(static_cast<double>(s.p)))));
}

/// f(0) = sum_gamma vol(S_gamma) exp(-t p^{gamma b}).
inline double density_at_zero(const RadialDensitySpec& s) {
  const std::int64_t c = scale_index(s);
  auto term = [&](std::int64_t g) {
    return sphere_volume(s.p, g) * std::exp(-s.t * ppow(s.p, static_cast<double>(g) * s.b));
  };
  double sum = 0.0;
  // upward: super-exponential decay once t p^{gamma b} > 1
  for (std::int64_t g = c + 1, n = 0;; ++g, ++n) {
    const double a = s.t * ppow(s.p, static_cast<double>(g) * s.b);
    const double tm = term(g);
    sum += tm;
    const double ratio = s.p * std::exp(-a * (ppow(s.p, s.b) - 1.0));
    if (a > 1.0 && ratio <= 0.5 && tm <= s.tolerance * sum) break;
    if (n > kMaxSeriesTerms) throw numerical_error("density_at_zero: upper series did not converge");
  }
  // downward: terms below gamma are bounded by p^gamma in total
  for (std::int64_t g = c, n = 0;; --g, ++n) {
    sum += term(g);
    if (ppow(s.p, static_cast<double>(g - 1)) <= s.tolerance * sum) break;
    if (n > kMaxSeriesTerms) throw numerical_error("density_at_zero: lower series did not converge");
  }
  return sum;
}

/// f on S_m written as a sum of positive terms:
///   f(m) = sum_{gamma <= -m} vol(S_gamma) (e^{-t p^{gamma b}} - e^{-t p^{(1-m) b}}),
/// which avoids the cancellation of the raw sphere-character series for
/// large |x|.
inline double density_on_sphere(const RadialDensitySpec& s, std::int64_t m) {
  const double big = s.t * ppow(s.p, static_cast<double>(1 - m) * s.b);
  const double gap_top = -std::expm1(-big);  // 1 - e^{-B}
  double sum = 0.0;
  for (std::int64_t g = -m, n = 0;; --g, ++n) {
    const double a = s.t * ppow(s.p, static_cast<double>(g) * s.b);
    const double ea = std::exp(-a);
    if (ea > 0.0) sum += sphere_volume(s.p, g) * ea * -std::expm1(a - big);
    const double tail = ppow(s.p, static_cast<double>(g - 1)) * gap_top;
    if (sum > 0.0 && tail <= s.tolerance * sum) break;
    if (n > kMaxSeriesTerms) throw numerical_error("density_on_sphere: series did not converge");
  }
  return sum;
}

/// P(|X| <= p^r) = p^r * integral over |xi| <= p^{-r} of e^{-t|xi|^b}.
inline double ball_mass(const RadialDensitySpec& s, std::int64_t r) {
  double sum = 0.0;
  for (std::int64_t g = -r, n = 0;; --g, ++n) {
    sum += sphere_volume(s.p, g) * std::exp(-s.t * ppow(s.p, static_cast<double>(g) * s.b));
    if (sum > 0.0 && ppow(s.p, static_cast<double>(g - 1)) <= s.tolerance * sum) break;
    if (n > kMaxSeriesTerms) throw numerical_error("ball_mass: series did not converge");
  }
  return std::min(1.0, ppow(s.p, static_cast<double>(r)) * sum);
}

/// P(|X| > p^r) = p^r * integral over |xi| <= p^{-r} of (1 - e^{-t|xi|^b}).
inline double ball_tail(const RadialDensitySpec& s, std::int64_t r) {
  const double ratio = ppow(s.p, -1.0 - s.b);
  double sum = 0.0;
  for (std::int64_t g = -r, n = 0;; --g, ++n) {
    const double a = s.t * ppow(s.p, static_cast<double>(g) * s.b);
    const double tm = sphere_volume(s.p, g) * -std::expm1(-a);
    sum += tm;
    if (a < 1.0 && tm * ratio / (1.0 - ratio) <= s.tolerance * sum) break;
    if (n > kMaxSeriesTerms) throw numerical_error("ball_tail: series did not converge");
  }
  return std::min(1.0, ppow(s.p, static_cast<double>(r)) * sum);
}

}  // namespace detail

/// Value of f_{t,b} on the sphere |x| = p^m.
inline double radial_density(const RadialDensitySpec& s, std::int64_t m) {
  s.validate();
  return detail::density_on_sphere(s, m);
}

inline double radial_density_at_zero(const RadialDensitySpec& s) {
  s.validate();
  return detail::density_at_zero(s);
}

/// Law of the radius exponent m of X ~ f_{t,b}: P(|X| = p^m), truncated to
/// the range outside of which each tail holds less than the tolerance.
class RadiusDistribution {
 public:
  explicit RadiusDistribution(const RadialDensitySpec& s) : spec_(s) {
    s.validate();
    const std::int64_t c = -detail::scale_index(s);
    std::int64_t lo = c;
    while (detail::ball_mass(s, lo - 1) > s.tolerance) {
      --lo;
      if (c - lo > 100000) throw numerical_error("radius_distribution: lower truncation failed");
    }
    std::int64_t hi = c;
    while (detail::ball_tail(s, hi) > s.tolerance) {
      ++hi;
      if (hi - c > 100000) throw numerical_error("radius_distribution: upper truncation failed");
    }
    m_min_ = lo;
    density_.resize(static_cast<std::size_t>(hi - lo + 1));
    prob_.resize(density_.size());
    cdf_.resize(density_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < prob_.size(); ++i) {
      const auto m = lo + static_cast<std::int64_t>(i);
      density_[i] = detail::density_on_sphere(s, m);
      prob_[i] = sphere_volume(s.p, m) * density_[i];
      acc += prob_[i];
      cdf_[i] = acc;
    }
  }

  const RadialDensitySpec& spec() const { return spec_; }
  std::int64_t m_min() const { return m_min_; }
  std::int64_t m_max() const { return m_min_ + static_cast<std::int64_t>(prob_.size()) - 1; }
  const std::vector<double>& probabilities() const { return prob_; }

  double probability(std::int64_t m) const {
    if (m < m_min() || m > m_max()) return 0.0;
    return prob_[static_cast<std::size_t>(m - m_min_)];
  }

  /// f on S_m, from the table when in range.
  double density(std::int64_t m) const {
    if (m < m_min() || m > m_max()) return detail::density_on_sphere(spec_, m);
    return density_[static_cast<std::size_t>(m - m_min_)];
  }

  double total() const { return cdf_.back(); }

  /// Inverse CDF draw of the radius exponent.
  std::int64_t sample(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return m_min_ + static_cast<std::int64_t>(i);
  }

 private:
  RadialDensitySpec spec_;
  std::int64_t m_min_ = 0;
  std::vector<double> density_;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

inline RadiusDistribution radius_distribution(const RadialDensitySpec& s) { return RadiusDistribution(s); }

/// f_{t,b} with its sphere values memoized over the bulk of the radius law.
/// Immutable after construction, so safe to share between threads.
class RadialDensity {
 public:
  explicit RadialDensity(const RadialDensitySpec& s) : radii_(s), at_zero_(detail::density_at_zero(s)) {}

  const RadialDensitySpec& spec() const { return radii_.spec(); }
  const RadiusDistribution& radii() const { return radii_; }
  double at_zero() const { return at_zero_; }
  double operator()(std::int64_t m) const { return radii_.density(m); }
  double at(const PadicNumber& x) const { return x.is_zero() ? at_zero_ : radii_.density(x.norm_exponent()); }
  double ball_mass(std::int64_t r) const { return detail::ball_mass(spec(), r); }
  double ball_tail(std::int64_t r) const { return detail::ball_tail(spec(), r); }

 private:
  RadiusDistribution radii_;
  double at_zero_;
};

}  // namespace sklab::padic
