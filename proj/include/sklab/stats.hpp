#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "sklab/errors.hpp"

namespace sklab {

/// Pairwise (cascade) summation; the association order depends only on the
/// length of the input, so the result is reproducible bit for bit.
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kBlock = 32;
  if (xs.size() <= kBlock) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct SampleMoments {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error s/sqrt(n) (s with n-1 denominator).
/// With a single sample the error is unknown and reported as +inf.
inline SampleMoments sample_moments(std::span<const double> xs) {
  detail::require(!xs.empty(), "sample_moments: empty sample");
  const double n = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / n;
  if (xs.size() == 1) return {mean, std::numeric_limits<double>::infinity()};
  std::vector<double> sq(xs.size());
  std::transform(xs.begin(), xs.end(), sq.begin(), [mean](double x) {
    const double d = x - mean;
    return d * d;
  });
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

inline double normal_cdf(double x, double sigma = 1.0) {
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

/// sup_x |F_n(x) - F(x)| between the empirical law of `samples` and a
/// continuous CDF. Ties (lattice-valued samples) are handled by comparing
/// both one-sided limits at each atom.
inline double kolmogorov_distance(std::vector<double> samples,
                                  const std::function<double(double)>& cdf) {
  detail::require(!samples.empty(), "kolmogorov_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double f = cdf(samples[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i) / n - f),
                      std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return worst;
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of `observed` counts against cell probabilities.
/// Adjacent cells are merged left to right until each expected count is at
/// least `min_expected`; the remainder is merged into the last cell.
inline ChiSquareResult chi_square_test(std::span<const double> observed,
                                       std::span<const double> probabilities,
                                       double min_expected = 5.0) {
  detail::require(observed.size() == probabilities.size() && !observed.empty(),
                  "chi_square_test: size mismatch");
  double total = 0.0;
  for (double o : observed) total += o;
  double psum = 0.0;
  for (double q : probabilities) psum += q;

  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += total * probabilities[i] / psum;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  ChiSquareResult r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  r.p_value = r.dof > 0 ? boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
  return r;
}

}  // namespace sklab
