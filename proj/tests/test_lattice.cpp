#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sklab/lattice.hpp"

using namespace sklab;

TEST(MakeGrid, FivePointSpacing) {
  const auto g = make_grid(5, 1);
  EXPECT_EQ(g.k(), 2);
  EXPECT_NEAR(g.epsilon(), 1.1209982, 1e-7);
}

TEST(MakeGrid, RejectsEvenSmallAndOversize) {
  EXPECT_THROW(make_grid(4, 1), invalid_argument);
  EXPECT_THROW(make_grid(1, 1), invalid_argument);
  EXPECT_THROW(make_grid(5, 0), invalid_argument);
  EXPECT_THROW(make_grid(101, 4), invalid_argument);  // 1.04e8 points
  EXPECT_NO_THROW(make_grid(101, 3));
}

TEST(MakeGrid, SpacingSquaredTimesNIsTwoPi) {
  for (int N = 3; N <= 4001; N += 2) {
    const auto g = make_grid(N, 1);
    EXPECT_NEAR(g.epsilon() * g.epsilon() * N / (2 * std::numbers::pi), 1.0, 1e-12) << N;
  }
}

TEST(EnumeratePoints, OneDimensionalOrder) {
  const auto pts = enumerate_points(make_grid(3, 1));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].coords, std::vector<int>{-1});
  EXPECT_EQ(pts[1].coords, std::vector<int>{0});
  EXPECT_EQ(pts[2].coords, std::vector<int>{1});
  EXPECT_EQ(enumerate_points(make_grid(5, 1)).size(), 5u);
}

TEST(EnumeratePoints, TwoDimensionalEnds) {
  const auto g = make_grid(3, 2);
  const auto pts = enumerate_points(g);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_EQ(pts.front().coords, (std::vector<int>{-1, -1}));
  EXPECT_EQ(pts.back().coords, (std::vector<int>{1, 1}));
}

TEST(EnumeratePoints, StrictlyIncreasing) {
  for (auto [N, d] : {std::pair{5, 1}, {3, 3}, {7, 2}, {5, 4}}) {
    const auto pts = enumerate_points(make_grid(N, d));
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1], pts[i]);
  }
}

TEST(PointIndex, Examples) {
  EXPECT_EQ(point_index(make_grid(3, 1), GridPoint{{0}}), 1u);
  EXPECT_EQ(point_index(make_grid(3, 2), GridPoint{{1, 1}}), 8u);
}

TEST(PointIndex, RoundTripExhaustive) {
  for (auto [N, d] : {std::pair{101, 1}, {99, 2}, {21, 3}, {9, 4}}) {
    const auto g = make_grid(N, d);
    const auto pts = enumerate_points(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(point_index(g, index_point(g, i)), i);
      EXPECT_EQ(index_point(g, i), pts[i]);
    }
  }
}

TEST(PointIndex, OutOfRange) {
  const auto g = make_grid(3, 2);
  EXPECT_THROW(point_index(g, GridPoint{{2, 0}}), invalid_argument);
  EXPECT_THROW(point_index(g, GridPoint{{0}}), invalid_argument);
  EXPECT_THROW(index_point(g, 9), invalid_argument);
}

TEST(Positions, AreSpacingTimesCoords) {
  const auto g = make_grid(7, 2);
  const auto x = g.position(GridPoint{{-3, 2}});
  EXPECT_DOUBLE_EQ(x[0], -3 * g.epsilon());
  EXPECT_DOUBLE_EQ(x[1], 2 * g.epsilon());
}

TEST(LatticeConversion, RoundTripAndBounds) {
  const auto g = make_grid(5, 2);
  const GridPoint p{{-2, 1}};
  EXPECT_EQ(to_grid(g, to_lattice(p)), p);
  EXPECT_TRUE(g.contains(LatticePoint{{2, -2}}));
  EXPECT_FALSE(g.contains(LatticePoint{{3, 0}}));
  EXPECT_THROW(to_grid(g, LatticePoint{{3, 0}}), invalid_argument);
}
