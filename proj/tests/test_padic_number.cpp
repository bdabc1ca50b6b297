#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "sklab/padic/number.hpp"

using namespace sklab;
using padic::PadicNumber;

namespace {

constexpr int kL = 24;

// random nonzero element: valuation in [-4, 4], full precision
PadicNumber random_number(std::uint32_t p, Rng& rng) {
  return PadicNumber::random_on_sphere(p, static_cast<std::int64_t>(rng.below(9)) - 4, kL, rng);
}

bool close(const PadicNumber& a, const PadicNumber& b) {
  // agreement on the digits both sides track
  const auto d = a - b;
  return d.is_zero() || d.valuation() >= std::min(a.absolute_precision(), b.absolute_precision()) - 1;
}

}  // namespace

TEST(PadicNumber, CarryExample) {
  const auto s = padic::padic_add(PadicNumber::from_integer(5, 2), PadicNumber::from_integer(5, 3));
  EXPECT_EQ(s.valuation(), 1);
  EXPECT_EQ(s.digit(1), 1u);
  EXPECT_EQ(s.digit(2), 0u);
  EXPECT_DOUBLE_EQ(s.norm(), 0.2);
}

TEST(PadicNumber, FromIntegerDigits) {
  const auto x = PadicNumber::from_integer(3, 46);  // 46 = 1 + 0*3 + 2*9 + 1*27
  EXPECT_EQ(x.valuation(), 0);
  EXPECT_EQ(x.digit(0), 1u);
  EXPECT_EQ(x.digit(1), 0u);
  EXPECT_EQ(x.digit(2), 2u);
  EXPECT_EQ(x.digit(3), 1u);
  EXPECT_EQ(x.digit(4), 0u);
  const auto m = PadicNumber::from_integer(2, -1, 8);  // ...11111111
  for (int j = 0; j < 8; ++j) EXPECT_EQ(m.digit(j), 1u);
  EXPECT_THROW(m.digit(8), precision_error);
  EXPECT_TRUE((m + PadicNumber::from_integer(2, 1, 8)).is_zero());
  EXPECT_NO_THROW(PadicNumber::from_integer(2, std::numeric_limits<std::int64_t>::min()));
}

TEST(PadicNumber, NormExamples) {
  EXPECT_DOUBLE_EQ(padic::padic_norm(PadicNumber::from_integer(7, 7)), 1.0 / 7);
  EXPECT_DOUBLE_EQ(padic::padic_norm(PadicNumber::power_of_p(7, -1)), 7.0);
  EXPECT_EQ(PadicNumber::power_of_p(7, -1).valuation(), -1);
  EXPECT_EQ(padic::padic_norm(PadicNumber::zero(3)), 0.0);
  EXPECT_DOUBLE_EQ(PadicNumber::from_integer(2, 48).norm(), 1.0 / 16);
}

TEST(PadicNumber, RejectsBadInput) {
  EXPECT_THROW(PadicNumber::zero(4), invalid_argument);
  EXPECT_THROW(PadicNumber::from_digits(3, 0, {3}), invalid_argument);
  EXPECT_THROW(PadicNumber::from_digits(3, 0, {}), invalid_argument);
  EXPECT_THROW(PadicNumber::from_integer(3, 1, 0), invalid_argument);
  EXPECT_THROW(PadicNumber::from_integer(3, 1) + PadicNumber::from_integer(5, 1), invalid_argument);
  EXPECT_THROW(PadicNumber::zero(3).norm_exponent(), invalid_argument);
}

TEST(PadicNumber, LeadingZerosAbsorbed) {
  const auto x = PadicNumber::from_digits(5, -2, {0, 0, 3, 1});
  EXPECT_EQ(x.valuation(), 0);
  EXPECT_EQ(x.precision(), 2);
  EXPECT_TRUE(PadicNumber::from_digits(5, 0, {0, 0}).is_zero());
}

TEST(PadicNumber, AdditiveInverse) {
  Rng rng(1);
  for (std::uint32_t p : {2u, 3u, 5u, 7u})
    for (int i = 0; i < 300; ++i) {
      const auto x = random_number(p, rng);
      EXPECT_TRUE((x + (-x)).is_zero());
      EXPECT_TRUE(padic::agree(x - x, PadicNumber::zero(p)));
    }
}

TEST(PadicNumber, FieldAxiomsOnRandomTriples) {
  Rng rng(2);
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int i = 0; i < 300; ++i) {
      const auto x = random_number(p, rng), y = random_number(p, rng), z = random_number(p, rng);
      EXPECT_TRUE(close(x + y, y + x));
      EXPECT_TRUE(close(x * y, y * x));
      EXPECT_TRUE(close((x + y) + z, x + (y + z)));
      EXPECT_TRUE(close((x * y) * z, x * (y * z)));
      EXPECT_TRUE(close(x * (y + z), x * y + x * z));
      EXPECT_TRUE(close(x * PadicNumber::from_integer(p, 1), x));
    }
}

TEST(PadicNumber, IntegerArithmeticMatchesMachineIntegers) {
  Rng rng(3);
  for (std::uint32_t p : {2u, 3u, 5u, 11u})
    for (int i = 0; i < 500; ++i) {
      const auto a = static_cast<std::int64_t>(rng.below(2000001)) - 1000000;
      const auto b = static_cast<std::int64_t>(rng.below(2000001)) - 1000000;
      const auto A = PadicNumber::from_integer(p, a), B = PadicNumber::from_integer(p, b);
      EXPECT_TRUE(padic::agree(A + B, PadicNumber::from_integer(p, a + b)) || a + b == 0);
      if (a != 0 && b != 0) EXPECT_TRUE(close(A * B, PadicNumber::from_integer(p, a * b)));
    }
}

TEST(PadicNumber, NormIsMultiplicative) {
  Rng rng(4);
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_number(p, rng), y = random_number(p, rng);
      EXPECT_DOUBLE_EQ(padic::padic_mul(x, y).norm(), x.norm() * y.norm());
    }
}

TEST(PadicNumber, UltrametricInequality) {
  Rng rng(5);
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_number(p, rng), y = random_number(p, rng);
      const double s = (x + y).norm();
      EXPECT_LE(s, std::max(x.norm(), y.norm()));
      if (x.norm() != y.norm()) EXPECT_EQ(s, std::max(x.norm(), y.norm()));
    }
}

TEST(PadicNumber, CancellationLosesPrecision) {
  const auto x = PadicNumber::from_digits(3, 0, {1, 2, 2});
  const auto y = PadicNumber::from_digits(3, 0, {1, 2, 1});
  const auto d = x - y;
  EXPECT_EQ(d.valuation(), 2);
  EXPECT_EQ(d.absolute_precision(), 3);
}

TEST(Character, IntegersAndOneOverP) {
  for (std::uint32_t p : {2u, 3u, 5u}) {
    EXPECT_NEAR(std::abs(padic::character(PadicNumber::from_integer(p, 17)) - 1.0), 0.0, 1e-15);
    const auto c = padic::character(PadicNumber::power_of_p(p, -1));
    EXPECT_NEAR(std::abs(c - std::polar(1.0, 2 * std::numbers::pi / p)), 0.0, 1e-15);
  }
  EXPECT_NEAR(std::abs(padic::character(PadicNumber::zero(3)) - 1.0), 0.0, 0.0);
}

TEST(Character, FractionalPartExample) {
  // 5-adic 1/5 + 3/25 = 8/25
  const auto x = PadicNumber::from_digits(5, -2, {3, 1, 4});
  EXPECT_NEAR(padic::fractional_part(x), 8.0 / 25.0, 1e-15);
  const auto truncated = PadicNumber::from_digits(5, -3, {1});
  EXPECT_THROW(padic::fractional_part(truncated), precision_error);
}

TEST(Character, Additive) {
  Rng rng(6);
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int i = 0; i < 500; ++i) {
      const auto x = random_number(p, rng), y = random_number(p, rng);
      const auto lhs = padic::character(x + y);
      const auto rhs = padic::character(x) * padic::character(y);
      EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
    }
}

TEST(RandomOnSphere, NormAndDigitLaw) {
  Rng rng(7);
  std::vector<int> first(5, 0);
  for (int i = 0; i < 40000; ++i) {
    const auto x = PadicNumber::random_on_sphere(5, 3, 6, rng);
    ASSERT_EQ(x.valuation(), 3);
    first[x.digit(3)] += 1;
  }
  EXPECT_EQ(first[0], 0);
  for (int d = 1; d < 5; ++d) EXPECT_NEAR(first[d] / 40000.0, 0.25, 0.01);
}
