#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sklab/oracles.hpp"
#include "sklab/padic/density.hpp"
#include "sklab/padic/process.hpp"
#include "sklab/stats.hpp"

using namespace sklab;
using namespace sklab::padic;

namespace {

// Radius histogram against probabilities on [lo, hi]; outside mass pooled.
double radius_p_value(const std::vector<PadicNumber>& xs, std::int64_t lo, std::int64_t hi,
                      const std::function<double(std::int64_t)>& prob) {
  std::vector<double> obs(static_cast<std::size_t>(hi - lo + 3), 0.0), probs(obs.size(), 0.0);
  for (const auto& x : xs) {
    const std::int64_t m = x.is_zero() ? lo - 1 : x.norm_exponent();
    const std::size_t i = m < lo ? 0 : (m > hi ? obs.size() - 1 : static_cast<std::size_t>(m - lo + 1));
    obs[i] += 1;
  }
  double inner = 0.0;
  for (std::int64_t m = lo; m <= hi; ++m) inner += probs[static_cast<std::size_t>(m - lo + 1)] = prob(m);
  double below = 0.0;
  for (std::int64_t m = lo - 80; m < lo; ++m) below += prob(m);
  probs.front() = below;
  probs.back() = std::max(0.0, 1.0 - inner - below);
  return chi_square_test(obs, probs).p_value;
}

}  // namespace

TEST(Increment, RadiusLaw) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  const auto r = radius_distribution(s);
  const IncrementSampler inc(s, 16);
  Rng rng(1);
  std::vector<PadicNumber> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(inc(rng));
  EXPECT_GT(radius_p_value(xs, -8, 10, [&](std::int64_t m) { return r.probability(m); }), 0.01);
}

TEST(Increment, LeadingDigitUniformOnUnits) {
  const IncrementSampler inc({5, 1.0, 1.0}, 8);
  Rng rng(2);
  std::vector<double> counts(4, 0.0);
  for (int i = 0; i < 40000; ++i) counts[inc(rng).digits()[0] - 1] += 1;
  EXPECT_GT(chi_square_test(counts, std::vector<double>(4, 0.25)).p_value, 0.01);
}

TEST(Increment, ConvolutionSemigroupInLaw) {
  const RadialDensitySpec s{3, 1.0, 0.4};
  const auto sum_law = radius_distribution(s.at_time(1.0));
  const IncrementSampler first(s, 16), second(s.at_time(0.6), 16);
  Rng rng(3);
  std::vector<PadicNumber> xs;
  for (int i = 0; i < 50000; ++i) xs.push_back(first(rng) + second(rng));
  EXPECT_GT(radius_p_value(xs, -6, 8, [&](std::int64_t m) { return sum_law.probability(m); }), 0.01);
}

TEST(Increment, DeterministicUnderSeed) {
  Rng a(4), b(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_increment({2, 0.5, 2.0}, 12, a), sample_increment({2, 0.5, 2.0}, 12, b));
}

TEST(PadicPath, StartAndTerminalLaw) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  const auto law = radius_distribution(s.at_time(2.0));
  Rng rng(5);
  const auto x = PadicNumber::from_integer(2, 3);
  std::vector<PadicNumber> ends;
  for (int i = 0; i < 4000; ++i) {
    const auto p = sample_padic_path(s, x, 2.0, 3, rng, 16);
    ASSERT_EQ(p.initial(), x);
    ends.push_back(p.at(2.0) - x);
  }
  EXPECT_GT(radius_p_value(ends, -6, 8, [&](std::int64_t m) { return law.probability(m); }), 0.01);
}

TEST(PadicPath, RefinementConsistency) {
  const RadialDensitySpec s{3, 2.0, 1.0};
  const auto zero = PadicNumber::zero(3);
  Rng rng(6);
  std::vector<double> coarse(30, 0.0), fine(30, 0.0);
  auto bin = [](const PadicNumber& z) {
    return z.is_zero() ? std::size_t{0} : static_cast<std::size_t>(std::clamp<std::int64_t>(z.norm_exponent() + 15, 0, 29));
  };
  for (int i = 0; i < 5000; ++i) {
    coarse[bin(sample_padic_mesh(s, zero, 1.0, 2, rng, 16)[2])] += 1;
    fine[bin(sample_padic_mesh(s, zero, 1.0, 3, rng, 16)[4])] += 1;
  }
  // two-sample chi-square on the occupied bins
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < 30; ++i)
    if (coarse[i] + fine[i] >= 10) {
      const double d = coarse[i] - fine[i];
      stat += d * d / (coarse[i] + fine[i]);
      ++dof;
    }
  ASSERT_GT(dof, 0);
  EXPECT_GT(boost::math::gamma_q(0.5 * dof, 0.5 * stat), 0.01);
}

TEST(PadicPath, MeshToPathShape) {
  const std::vector<PadicNumber> v{PadicNumber::from_integer(2, 1), PadicNumber::from_integer(2, 2),
                                   PadicNumber::from_integer(2, 3)};
  const auto p = mesh_to_path(v, 1.0);
  EXPECT_EQ(p.at(0.0), v[0]);
  EXPECT_EQ(p.at(0.5), v[1]);
  EXPECT_EQ(p.at(1.0), v[2]);
  EXPECT_EQ(p.at(0.74), v[1]);
  EXPECT_THROW(mesh_to_path({v[0]}, 1.0), invalid_argument);
}

TEST(PadicBridge, EndpointsExact) {
  Rng rng(7);
  const RadialDensitySpec s{2, 1.0, 1.0};
  const auto x = PadicNumber::from_integer(2, 5), y = PadicNumber::power_of_p(2, -2);
  const PadicBridgeSampler bridge(s, 1.0, 5, 16);
  for (int i = 0; i < 2000; ++i) {
    const auto mesh = bridge.sample_mesh(x, y, rng);
    ASSERT_EQ(mesh.size(), 33u);
    ASSERT_EQ(mesh.front(), x);
    ASSERT_EQ(mesh.back(), y);
    const auto path = bridge.sample(x, y, rng);
    ASSERT_EQ(path.initial(), x);
    ASSERT_EQ(path.at(1.0), y);
  }
}

TEST(PadicBridge, MidpointLawBothProposals) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  const auto zero = PadicNumber::zero(2);
  for (auto proposal : {BridgeProposal::forward, BridgeProposal::two_sided}) {
    const PadicBridgeSampler bridge(s, 1.0, 1, 16, proposal);
    Rng rng(8);
    std::vector<PadicNumber> mids;
    for (int i = 0; i < 50000; ++i) mids.push_back(bridge.sample_mesh(zero, zero, rng)[1]);
    EXPECT_GT(radius_p_value(mids, -8, 6, [](std::int64_t m) { return oracles::padic_bridge_midpoint(2, 1.0, 0.5, m); }),
              0.01);
  }
}

TEST(PadicBridge, MidpointLawWithDistinctEndpoints) {
  // |z| law for x = 0, y = 1 by brute force over |z| and the sphere position of z relative to y
  const RadialDensitySpec s{3, 1.0, 0.5};
  const PadicBridgeSampler bridge(s, 1.0, 1, 16);
  const RadialDensity f(s.at_time(0.5));
  const auto x = PadicNumber::zero(3), y = PadicNumber::from_integer(3, 1);
  Rng rng(9);
  std::vector<PadicNumber> mids;
  for (int i = 0; i < 50000; ++i) mids.push_back(bridge.sample_mesh(x, y, rng)[1]);
  // |z| = p^m: m > 0 or m < 0 gives |y - z| = max(|z|, 1); m = 0 splits into z = 1 mod 3 (|y - z| <= 1/3) and z = 2 mod 3
  auto weight = [&](std::int64_t m) {
    const double vol = sphere_volume(3, m);
    if (m != 0) return vol * f(m) * f(std::max<std::int64_t>(m, 0));
    double w = (vol / 2) * f(0) * f(0);
    for (std::int64_t k = 1; k < 80; ++k) w += sphere_volume(3, -k) * f(0) * f(-k);
    return w;
  };
  double total = 0.0;
  for (std::int64_t m = -80; m <= 40; ++m) total += weight(m);
  EXPECT_GT(radius_p_value(mids, -6, 6, [&](std::int64_t m) { return weight(m) / total; }), 0.01);
}

TEST(PadicBridge, AcceptanceRates) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  const auto x = PadicNumber::zero(2), y = PadicNumber::power_of_p(2, -1);
  const double h = 0.5;
  const RadialDensity fh(s.at_time(h)), f2h(s.at_time(2 * h));
  const double ref_forward = f2h(1) / fh.at_zero();
  const double ref_two_sided = f2h(1) / (2 * fh(1));
  for (auto [proposal, ref] : {std::pair{BridgeProposal::forward, ref_forward}, {BridgeProposal::two_sided, ref_two_sided}}) {
    const PadicBridgeSampler bridge(s, 1.0, 1, 16, proposal);
    Rng rng(10);
    std::size_t proposals = 0;
    const int accepted = 40000;
    for (int i = 0; i < accepted; ++i) bridge.midpoint(1, x, y, rng, &proposals);
    const double rate = accepted / static_cast<double>(proposals);
    const double se = std::sqrt(rate * (1 - rate) / static_cast<double>(proposals));
    EXPECT_NEAR(rate, ref, 3 * se);
  }
}

TEST(PadicBridge, BudgetExhaustionThrows) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  const PadicBridgeSampler bridge(s, 1.0, 1, 16, BridgeProposal::forward, 3);
  Rng rng(11);
  EXPECT_THROW(
      for (int i = 0; i < 100; ++i) bridge.midpoint(1, PadicNumber::zero(2), PadicNumber::power_of_p(2, -40), rng),
      numerical_error);
}

TEST(PadicBridge, RejectsBadInput) {
  const RadialDensitySpec s{2, 1.0, 1.0};
  EXPECT_THROW(PadicBridgeSampler(s, 0.0, 3), invalid_argument);
  EXPECT_THROW(PadicBridgeSampler(s, 1.0, 21), invalid_argument);
  Rng rng(12);
  const PadicBridgeSampler bridge(s, 1.0, 2);
  EXPECT_THROW(bridge.sample_mesh(PadicNumber::zero(3), PadicNumber::zero(2), rng), invalid_argument);
}
