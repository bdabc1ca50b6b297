#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "sklab/errors.hpp"

namespace sklab {

/// Point of the finite grid, integer coordinates in [-k, k] per axis.
struct GridPoint {
  std::vector<int> coords;
  auto operator<=>(const GridPoint&) const = default;
};

/// Point of the unbounded lattice epsilon * Z^d.
struct LatticePoint {
  std::vector<std::int64_t> coords;
  auto operator<=>(const LatticePoint&) const = default;

  std::size_t dim() const { return coords.size(); }
};

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

/// Symmetric grid epsilon * {-k..k}^d with N = 2k + 1 and N epsilon^2 = 2 pi.
class GridSpec {
 public:
  int N() const { return n_; }
  int k() const { return (n_ - 1) / 2; }
  int d() const { return d_; }
  double epsilon() const { return epsilon_; }
  std::size_t size() const { return size_; }

  double position(int coord) const { return epsilon_ * coord; }
  std::vector<double> position(const GridPoint& p) const {
    std::vector<double> x(p.coords.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = epsilon_ * p.coords[i];
    return x;
  }

  bool contains(const GridPoint& p) const {
    if (static_cast<int>(p.coords.size()) != d_) return false;
    for (int c : p.coords)
      if (c < -k() || c > k()) return false;
    return true;
  }
  bool contains(const LatticePoint& p) const {
    if (static_cast<int>(p.coords.size()) != d_) return false;
    for (auto c : p.coords)
      if (c < -k() || c > k()) return false;
    return true;
  }

  friend GridSpec make_grid(int N, int d);

 private:
  GridSpec(int n, int d, double eps, std::size_t size) : n_(n), d_(d), epsilon_(eps), size_(size) {}

  int n_;
  int d_;
  double epsilon_;
  std::size_t size_;
};

inline GridSpec make_grid(int N, int d) {
  detail::require(N >= 3, "grid: N must be at least 3, got " + std::to_string(N));
  detail::require(N % 2 == 1, "grid: N must be odd, got " + std::to_string(N));
  detail::require(d >= 1, "grid: dimension must be positive");
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= static_cast<std::size_t>(N);
    detail::require(total <= kMaxGridPoints, "grid: N^d exceeds 10^7 points");
  }
  return GridSpec(N, d, std::sqrt(2.0 * std::numbers::pi / N), total);
}

/// Lexicographic index, axis 0 slowest.
inline std::size_t point_index(const GridSpec& g, const GridPoint& p) {
  detail::require(g.contains(p), "point_index: point outside grid");
  std::size_t idx = 0;
  for (int c : p.coords) idx = idx * static_cast<std::size_t>(g.N()) + static_cast<std::size_t>(c + g.k());
  return idx;
}

inline GridPoint index_point(const GridSpec& g, std::size_t i) {
  detail::require(i < g.size(), "index_point: index out of range");
  GridPoint p{std::vector<int>(static_cast<std::size_t>(g.d()))};
  for (int axis = g.d() - 1; axis >= 0; --axis) {
    p.coords[static_cast<std::size_t>(axis)] = static_cast<int>(i % static_cast<std::size_t>(g.N())) - g.k();
    i /= static_cast<std::size_t>(g.N());
  }
  return p;
}

inline std::vector<GridPoint> enumerate_points(const GridSpec& g) {
  std::vector<GridPoint> pts;
  pts.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts.push_back(index_point(g, i));
  return pts;
}

inline LatticePoint to_lattice(const GridPoint& p) {
  return LatticePoint{std::vector<std::int64_t>(p.coords.begin(), p.coords.end())};
}

inline GridPoint to_grid(const GridSpec& g, const LatticePoint& p) {
  detail::require(g.contains(p), "to_grid: lattice point outside the finite grid");
  return GridPoint{std::vector<int>(p.coords.begin(), p.coords.end())};
}

}  // namespace sklab
