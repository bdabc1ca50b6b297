#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sklab/oracles.hpp"
#include "sklab/padic/checks.hpp"
#include "sklab/padic/density.hpp"
#include "sklab/stats.hpp"

using namespace sklab;
using namespace sklab::padic;

namespace {

std::vector<RadialDensitySpec> parameter_grid() {
  std::vector<RadialDensitySpec> out;
  for (std::uint32_t p : {2u, 3u, 5u})
    for (double b : {0.5, 1.0, 2.0})
      for (double t : {0.1, 1.0, 10.0}) out.push_back({p, b, t});
  return out;
}

}  // namespace

TEST(SphereCharacterIntegral, ClosedFormCases) {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    EXPECT_NEAR(sphere_character_integral(p, -40, 0), 1.0 - 1.0 / p, 1e-15);
    EXPECT_NEAR(sphere_character_integral(p, 1, 0), -1.0 / p, 1e-15);
    EXPECT_EQ(sphere_character_integral(p, 2, 0), 0.0);
  }
}

TEST(SphereCharacterIntegral, MatchesBruteForceSums) {
  for (std::uint32_t p : {2u, 3u, 5u})
    for (std::int64_t m = -3; m <= 3; ++m)
      for (std::int64_t g = -2; g <= 2; ++g)
        EXPECT_NEAR(sphere_character_integral(p, m, g), oracles::brute_sphere_character_integral(p, m, g), 1e-12)
            << p << " " << m << " " << g;
}

TEST(RadialDensity, AtZeroMatchesPartialSum) {
  EXPECT_NEAR(radial_density_at_zero({2, 2.0, 1.0}), oracles::padic_density_at_zero(2, 2.0, 1.0), 1e-14);
  for (const auto& s : parameter_grid())
    EXPECT_NEAR(radial_density_at_zero(s), oracles::padic_density_at_zero(s.p, s.b, s.t, -300, 60),
                1e-12 * radial_density_at_zero(s));
}

TEST(RadialDensity, MatchesRawSeries) {
  for (const auto& s : parameter_grid())
    for (std::int64_t m = -6; m <= 6; ++m) {
      const double ref = oracles::padic_density(s.p, s.b, s.t, m);
      EXPECT_NEAR(radial_density(s, m), ref, 1e-10 * radial_density_at_zero(s)) << s.p << " " << s.b << " " << s.t;
    }
}

TEST(RadialDensity, PositiveAndBoundedByValueAtZero) {
  for (const auto& s : parameter_grid()) {
    const double f0 = radial_density_at_zero(s);
    double prev = f0;
    for (std::int64_t m = -20; m <= 20; ++m) {
      const double f = radial_density(s, m);
      EXPECT_GT(f, 0.0) << m;
      EXPECT_LE(f, f0 * (1 + 1e-14));
      EXPECT_LE(f, prev * (1 + 1e-12));
      prev = f;
    }
  }
}

TEST(RadialDensity, RejectsBadSpecs) {
  EXPECT_THROW(radial_density({4, 1.0, 1.0}, 0), invalid_argument);
  EXPECT_THROW(radial_density({2, 0.0, 1.0}, 0), invalid_argument);
  EXPECT_THROW(radial_density({2, 1.0, -1.0}, 0), invalid_argument);
}

TEST(RadiusDistribution, NormalizedAndNonNegative) {
  for (const auto& s : parameter_grid()) {
    const auto r = radius_distribution(s);
    double total = 0.0;
    for (double q : r.probabilities()) {
      EXPECT_GE(q, 0.0);
      total += q;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
    EXPECT_NEAR(r.probability(0), sphere_volume(s.p, 0) * radial_density(s, 0), 1e-14);
    EXPECT_EQ(r.probability(r.m_max() + 5), 0.0);
  }
}

TEST(RadiusDistribution, DiracLimit) {
  const auto r = radius_distribution({2, 1.0, 1e-4});
  double inner = 0.0;
  for (std::int64_t m = r.m_min(); m <= 0; ++m) inner += r.probability(m);
  EXPECT_GE(inner, 0.99);
}

TEST(RadiusDistribution, InverseCdfSampling) {
  const auto r = radius_distribution({3, 1.0, 1.0});
  Rng rng(1);
  std::vector<double> counts(static_cast<std::size_t>(r.m_max() - r.m_min() + 1), 0.0);
  for (int i = 0; i < 100000; ++i) counts[static_cast<std::size_t>(r.sample(rng) - r.m_min())] += 1;
  EXPECT_GT(chi_square_test(counts, r.probabilities()).p_value, 0.01);
}

TEST(Moments, ZeroOrderIsOne) {
  const auto rep = moment_and_bound_checks({2, 1.0, 1.0}, 0.0);
  for (double v : rep.moment_ratio) EXPECT_NEAR(v, 1.0, 1e-10);
  EXPECT_NEAR(rep.sup_moment_ratio, 1.0, 1e-10);
}

TEST(Moments, OrderAtLeastBThrows) {
  EXPECT_THROW(moment({2, 1.0, 1.0}, 1.0), invalid_argument);
  EXPECT_THROW(moment_and_bound_checks({2, 1.0, 1.0}, 1.5), invalid_argument);
  EXPECT_THROW(moment_and_bound_checks({2, 1.0, 1.0}, -0.1), invalid_argument);
}

TEST(Moments, SupRatioStableUnderGridRefinement) {
  const RadialDensitySpec s{2, 2.0, 1.0};
  const auto coarse = moment_and_bound_checks(s, 1.0, log_grid(1e-3, 1e3, 12));
  const auto fine = moment_and_bound_checks(s, 1.0, log_grid(1e-3, 1e3, 24));
  EXPECT_TRUE(std::isfinite(coarse.sup_moment_ratio));
  EXPECT_NEAR(fine.sup_moment_ratio / coarse.sup_moment_ratio, 1.0, 0.01);
  EXPECT_NEAR(fine.sup_density_ratio / coarse.sup_density_ratio, 1.0, 0.01);
}

TEST(Moments, MatchDirectSeries) {
  // terms decay like p^{(k - b) m}; the raw series is accurate up to m = 10 here
  const RadialDensitySpec s{3, 2.0, 0.5};
  double ref = 0.0;
  for (std::int64_t m = -60; m <= 10; ++m)
    ref += std::pow(3.0, 0.5 * static_cast<double>(m)) * sphere_volume(3, m) * oracles::padic_density(3, 2.0, 0.5, m);
  EXPECT_NEAR(moment(s, 0.5), ref, 1e-6 * ref);
}

TEST(Convolution, SemigroupLaw) {
  EXPECT_LT(semigroup_convolution_check({2, 1.0, 1.0}, 0.5, 0.5), 1e-8);
  for (const auto& s : parameter_grid()) EXPECT_LT(semigroup_convolution_check(s, 0.3 * s.t, 0.7 * s.t), 1e-8);
}

TEST(Convolution, DiracLimit) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  double worst = 0.0;
  for (std::int64_t m = -12; m <= 12; ++m)
    worst = std::max(worst, std::abs(radial_convolution(s.at_time(1e-6), s, m) - radial_density(s, m)));
  EXPECT_LT(worst, 1e-4);
}

TEST(Convolution, ExactlySymmetric) {
  const RadialDensitySpec s{3, 0.5, 0.2}, t{3, 0.5, 1.7};
  for (std::int64_t m = -12; m <= 12; ++m) EXPECT_EQ(radial_convolution(s, t, m), radial_convolution(t, s, m));
}

TEST(PositiveDefiniteness, SinglePointAndFarPair) {
  const RadialDensitySpec s{3, 1.0, 1.0};
  const double f0 = radial_density_at_zero(s);
  EXPECT_NEAR(positive_definiteness_check(s, {PadicNumber::from_integer(3, 5)}), f0, 1e-15);
  const auto far = positive_definiteness_check(s, {PadicNumber::zero(3), PadicNumber::power_of_p(3, -30)});
  EXPECT_NEAR(far, f0, 1e-6 * f0);
}

TEST(PositiveDefiniteness, RandomPointSets) {
  Rng rng(2);
  for (const auto& s : parameter_grid()) {
    std::vector<PadicNumber> pts;
    while (pts.size() < 16) {
      auto x = PadicNumber::random_on_sphere(s.p, static_cast<std::int64_t>(rng.below(7)) - 3, 12, rng);
      if (std::none_of(pts.begin(), pts.end(), [&](const PadicNumber& y) { return agree(x, y); })) pts.push_back(x);
    }
    EXPECT_GE(positive_definiteness_check(s, pts), -1e-10);
  }
}

TEST(PositiveDefiniteness, DuplicatePointsRejected) {
  const auto x = PadicNumber::from_integer(3, 4);
  EXPECT_THROW(positive_definiteness_check({3, 1.0, 1.0}, {x, x}), invalid_argument);
}
