#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/lattice.hpp"
#include "sklab/paths.hpp"
#include "sklab/rng.hpp"

namespace sklab {

/// The random walk confined to the finite grid: exits are suppressed, so
/// the generator is minus the free part of the reflecting stochastic
/// Hamiltonian. Simulated by uniformization at rate Lambda = d / eps^2 with
/// the jump chain P = I + Q / Lambda (each in-grid neighbour 1/(2d), the
/// remainder stays).
class GridWalkChain {
 public:
  /// Upper bound on (states) x (event counts) stored per bridge table.
  static constexpr std::size_t kMaxTableEntries = 50'000'000;

  explicit GridWalkChain(const GridSpec& g) : grid_(g) {
    const std::size_t n = g.size();
    neighbors_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const GridPoint p = index_point(g, i);
      for (int axis = 0; axis < g.d(); ++axis)
        for (int step : {-1, 1}) {
          GridPoint q = p;
          q.coords[static_cast<std::size_t>(axis)] += step;
          if (g.contains(q)) neighbors_[i].push_back(point_index(g, q));
        }
    }
  }

  const GridSpec& grid() const { return grid_; }
  double rate() const { return grid_.d() / (grid_.epsilon() * grid_.epsilon()); }
  double move_probability() const { return 1.0 / (2.0 * grid_.d()); }
  double stay_probability(std::size_t i) const {
    return 1.0 - static_cast<double>(neighbors_[i].size()) * move_probability();
  }

  /// Columns P^m e_b for m = 0..n_max together with Poisson(Lambda T)
  /// weights; everything needed to condition on ending at b.
  class BridgeTable {
   public:
    std::size_t target() const { return target_; }
    double horizon() const { return horizon_; }
    std::size_t max_events() const { return poisson_.size() - 1; }
    double column(std::size_t m, std::size_t state) const { return columns_[m * states_ + state]; }
    double poisson(std::size_t m) const { return poisson_[m]; }

   private:
    friend class GridWalkChain;
    std::size_t target_ = 0;
    std::size_t states_ = 0;
    double horizon_ = 0.0;
    std::vector<double> poisson_;
    std::vector<double> columns_;
  };

  BridgeTable bridge_table(std::size_t target, double T) const {
    detail::require(T > 0.0, "grid bridge: T must be positive");
    detail::require(target < grid_.size(), "grid bridge: target index out of range");
    const double lambda = rate() * T;
    // Poisson weights in log space; stop well past the mean once negligible.
    std::vector<double> pois;
    for (std::size_t m = 0;; ++m) {
      const auto md = static_cast<double>(m);
      const double w = std::exp(-lambda + md * std::log(lambda) - std::lgamma(md + 1.0));
      pois.push_back(w);
      if (md > lambda && w < 1e-18) break;
    }
    const std::size_t n = grid_.size();
    if (pois.size() * n > kMaxTableEntries)
      throw invalid_argument("grid bridge: matrix-power table too large for this grid and horizon");
    BridgeTable t;
    t.target_ = target;
    t.states_ = n;
    t.horizon_ = T;
    t.poisson_ = std::move(pois);
    t.columns_.assign(t.poisson_.size() * n, 0.0);
    t.columns_[target] = 1.0;
    for (std::size_t m = 1; m < t.poisson_.size(); ++m) {
      const double* prev = &t.columns_[(m - 1) * n];
      double* cur = &t.columns_[m * n];
      for (std::size_t s = 0; s < n; ++s) {
        double v = stay_probability(s) * prev[s];
        for (auto nb : neighbors_[s]) v += move_probability() * prev[nb];
        cur[s] = v;
      }
    }
    return t;
  }

  /// q*_T(a, b) = (e^{-T H_free})[a, b] from the table's Poisson mixture.
  double transition(const BridgeTable& t, std::size_t a) const {
    double q = 0.0;
    for (std::size_t m = 0; m <= t.max_events(); ++m) q += t.poisson(m) * t.column(m, a);
    return q;
  }

  double transition(std::size_t a, std::size_t b, double T) const { return transition(bridge_table(b, T), a); }

  /// Exact bridge from state a to the table's target over [0, T].
  LatticePath sample_bridge(const BridgeTable& t, std::size_t a, Rng& rng) const {
    detail::require(a < grid_.size(), "grid bridge: start index out of range");
    const double total = transition(t, a);
    if (!(total > 0.0)) throw numerical_error("grid bridge: endpoint unreachable within the event table");

    double u = rng.uniform() * total;
    std::size_t events = t.max_events();
    for (std::size_t m = 0; m <= t.max_events(); ++m) {
      const double w = t.poisson(m) * t.column(m, a);
      if (u < w) {
        events = m;
        break;
      }
      u -= w;
    }
    while (t.poisson(events) * t.column(events, a) == 0.0) --events;  // guard the fall-through

    const auto times = detail::sorted_uniform_times(events, t.horizon(), rng);
    LatticePath path(t.horizon(), to_lattice(index_point(grid_, a)));
    std::size_t cur = a;
    for (std::size_t i = 0; i < events; ++i) {
      const std::size_t remaining = events - i - 1;
      const double norm = t.column(remaining + 1, cur);
      double r = rng.uniform() * norm;
      std::size_t next = cur;
      const double stay = stay_probability(cur) * t.column(remaining, cur);
      if (r >= stay) {
        r -= stay;
        next = neighbors_[cur].back();
        for (auto nb : neighbors_[cur]) {
          const double w = move_probability() * t.column(remaining, nb);
          if (r < w) {
            next = nb;
            break;
          }
          r -= w;
        }
        // roundoff can leave r just past the last cell; pick a feasible one
        if (t.column(remaining, next) == 0.0)
          for (auto nb : neighbors_[cur])
            if (t.column(remaining, nb) > 0.0) next = nb;
      }
      if (next != cur) {
        path.push_jump(times[i], to_lattice(index_point(grid_, next)));
        cur = next;
      }
    }
    return path;
  }

 private:
  GridSpec grid_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

}  // namespace sklab
