#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sklab/errors.hpp"
#include "sklab/padic/density.hpp"
#include "sklab/padic/number.hpp"

namespace sklab::padic {

/// E|X|^k = sum_m p^{mk} P(|X| = p^m) for X ~ f_{t,b}; requires 0 <= k < b.
inline double moment(const RadialDensitySpec& s, double k) {
  s.validate();
  if (!(k >= 0.0 && k < s.b))
    throw invalid_argument("moment of order k = " + std::to_string(k) + " diverges unless 0 <= k < b = " +
                           std::to_string(s.b));
  const RadiusDistribution radii(s);
  double sum = 0.0;
  for (std::int64_t m = radii.m_min(); m <= radii.m_max(); ++m) sum += ppow(s.p, m * k) * radii.probability(m);
  // far tail: P(m) ~ C p^{-mb}, so terms shrink by about p^{k-b}
  const double r = ppow(s.p, k - s.b);
  for (std::int64_t m = radii.m_max() + 1, n = 0;; ++m, ++n) {
    const double term = ppow(s.p, m * k) * sphere_volume(s.p, m) * detail::density_on_sphere(s, m);
    sum += term;
    if (term * r / (1.0 - r) <= 1e-3 * s.tolerance * sum) break;
    if (n > detail::kMaxSeriesTerms) throw numerical_error("moment: tail series did not converge");
  }
  return sum;
}

/// t_lo..t_hi on a logarithmic grid with the given density per decade.
inline std::vector<double> log_grid(double t_lo, double t_hi, int per_decade) {
  detail::require(t_lo > 0.0 && t_hi > t_lo && per_decade >= 1, "log_grid: invalid range");
  const int n = static_cast<int>(std::ceil(std::log10(t_hi / t_lo) * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(t_lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  out.back() = t_hi;
  return out;
}

struct MomentBoundReport {
  double k = 0.0;
  std::vector<double> t_grid;
  std::vector<double> moment_ratio;   // E|X_t|^k / t^{k/b}
  std::vector<double> density_ratio;  // f_t(0) t^{1/b}
  double sup_moment_ratio = 0.0;
  double sup_density_ratio = 0.0;
};

/// Scaling bounds over a t-grid; spec.t is ignored.
inline MomentBoundReport moment_and_bound_checks(const RadialDensitySpec& s, double k,
                                                 std::vector<double> t_grid = log_grid(1e-3, 1e3, 24)) {
  s.validate();
  if (!(k >= 0.0 && k < s.b))
    throw invalid_argument("moment bound needs 0 <= k < b (k = " + std::to_string(k) + ", b = " +
                           std::to_string(s.b) + ")");
  MomentBoundReport out;
  out.k = k;
  out.t_grid = std::move(t_grid);
  for (double t : out.t_grid) {
    const auto st = s.at_time(t);
    const double mr = moment(st, k) / std::pow(t, k / s.b);
    const double dr = detail::density_at_zero(st) * std::pow(t, 1.0 / s.b);
    out.moment_ratio.push_back(mr);
    out.density_ratio.push_back(dr);
    out.sup_moment_ratio = std::max(out.sup_moment_ratio, mr);
    out.sup_density_ratio = std::max(out.sup_density_ratio, dr);
  }
  return out;
}

/// (f_s * f_t) on the sphere |x| = p^m, split by the relative size of |z|
/// and |x - z|.
inline double radial_convolution(const RadialDensitySpec& s, const RadialDensitySpec& t, std::int64_t m) {
  detail::require(s.p == t.p && s.b == t.b, "radial_convolution: specs differ in p or b");
  const double fm = detail::density_on_sphere(s, m);
  const double gm = detail::density_on_sphere(t, m);
  const double Fs = detail::ball_mass(s, m - 1);
  const double Ft = detail::ball_mass(t, m - 1);
  const double inner = gm * Fs + fm * Ft;
  const double both = fm * gm * ppow(s.p, static_cast<double>(m)) * (1.0 - 2.0 / s.p);
  double outer = 0.0;
  for (std::int64_t j = m + 1, n = 0;; ++j, ++n) {
    const double term = sphere_volume(s.p, j) * (detail::density_on_sphere(s, j) * detail::density_on_sphere(t, j));
    outer += term;
    if (term <= 1e-17 * (outer + inner)) break;
    if (n > detail::kMaxSeriesTerms) throw numerical_error("radial_convolution: series did not converge");
  }
  return inner + both + outer;
}

/// max over m in [-12, 12] of |(f_s * f_t)(m) - f_{s+t}(m)|.
inline double semigroup_convolution_check(const RadialDensitySpec& spec, double s, double t) {
  detail::require(s > 0.0 && t > 0.0, "semigroup check: s and t must be positive");
  const auto fs = spec.at_time(s), ft = spec.at_time(t), fst = spec.at_time(s + t);
  fs.validate();
  double worst = 0.0;
  for (std::int64_t m = -12; m <= 12; ++m)
    worst = std::max(worst, std::abs(radial_convolution(fs, ft, m) - detail::density_on_sphere(fst, m)));
  return worst;
}

/// Gram matrix [f_t(x_i - x_j)].
inline Eigen::MatrixXd gram_matrix(const RadialDensitySpec& s, const std::vector<PadicNumber>& points) {
  const RadialDensity f(s);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto diff = points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)];
      if (i != j && diff.is_zero())
        throw invalid_argument("positive definiteness check: duplicate points " + std::to_string(j) + " and " +
                               std::to_string(i));
      G(i, j) = G(j, i) = f.at(diff);
    }
  return G;
}

inline double positive_definiteness_check(const RadialDensitySpec& s, const std::vector<PadicNumber>& points) {
  detail::require(!points.empty(), "positive definiteness check: no points");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_matrix(s, points), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("positive definiteness check: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

}  // namespace sklab::padic
