#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/lattice.hpp"
#include "sklab/potential.hpp"
#include "sklab/rng.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Right-continuous step function on [0, T] with finitely many jumps: an
/// element of the Skorokhod space. The value on [t_i, t_{i+1}) is states[i];
/// the value at T is the last state.
template <class State>
class CadlagPath {
 public:
  CadlagPath(double horizon, State initial) : horizon_(horizon) {
    detail::require(horizon > 0.0, "path horizon must be positive");
    states_.push_back(std::move(initial));
  }

  /// Appends a jump to `s` at `time`. A "jump" to the current state is
  /// absorbed so that consecutive states always differ. Returns whether a
  /// jump was recorded.
  bool push_jump(double time, State s) {
    detail::require(time > 0.0 && time < horizon_, "jump time outside (0, T)");
    detail::require(jump_times_.empty() || time > jump_times_.back(), "jump times must increase");
    if (s == states_.back()) return false;
    jump_times_.push_back(time);
    states_.push_back(std::move(s));
    return true;
  }

  double horizon() const { return horizon_; }
  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<State>& states() const { return states_; }
  std::size_t jump_count() const { return jump_times_.size(); }
  const State& initial() const { return states_.front(); }
  const State& terminal() const { return states_.back(); }

  /// Index of the constancy interval containing s.
  std::size_t piece(double s) const {
    detail::require(s >= 0.0 && s <= horizon_, "path evaluated outside [0, T]");
    return static_cast<std::size_t>(std::upper_bound(jump_times_.begin(), jump_times_.end(), s) -
                                    jump_times_.begin());
  }

  const State& at(double s) const { return states_[piece(s)]; }

  /// Length of constancy interval i.
  double holding_time(std::size_t i) const {
    const double lo = i == 0 ? 0.0 : jump_times_[i - 1];
    const double hi = i == jump_times_.size() ? horizon_ : jump_times_[i];
    return hi - lo;
  }

  /// Restriction to [0, s] and the shifted remainder on [0, T - s].
  std::pair<CadlagPath, CadlagPath> split_at(double s) const {
    detail::require(s > 0.0 && s < horizon_, "split time must lie in (0, T)");
    CadlagPath left(s, states_.front());
    std::size_t i = 0;
    for (; i < jump_times_.size() && jump_times_[i] < s; ++i) left.push_jump(jump_times_[i], states_[i + 1]);
    CadlagPath right(horizon_ - s, states_[i]);
    for (; i < jump_times_.size(); ++i)
      if (jump_times_[i] > s) right.push_jump(jump_times_[i] - s, states_[i + 1]);
    return {std::move(left), std::move(right)};
  }

  /// p followed by q (q shifted by p's horizon).
  friend CadlagPath concatenate(const CadlagPath& p, const CadlagPath& q) {
    CadlagPath out = p;
    out.horizon_ = p.horizon_ + q.horizon_;
    if (!(q.states_.front() == out.states_.back())) {
      out.jump_times_.push_back(p.horizon_);
      out.states_.push_back(q.states_.front());
    }
    for (std::size_t i = 0; i < q.jump_times_.size(); ++i)
      out.push_jump(p.horizon_ + q.jump_times_[i], q.states_[i + 1]);
    return out;
  }

 private:
  double horizon_;
  std::vector<double> jump_times_;
  std::vector<State> states_;
};

/// Real-vector path sampled at i T / 2^J, interpreted piecewise linearly.
class MeshPath {
 public:
  MeshPath(double horizon, int level, std::size_t dim)
      : horizon_(horizon), level_(checked_level(level)), dim_(dim), values_(((std::size_t{1} << level) + 1) * dim, 0.0) {
    detail::require(horizon > 0.0, "mesh path horizon must be positive");
    detail::require(dim >= 1, "mesh path dimension must be positive");
  }

  double horizon() const { return horizon_; }
  int level() const { return level_; }
  std::size_t dim() const { return dim_; }
  std::size_t node_count() const { return (std::size_t{1} << level_) + 1; }
  double step() const { return horizon_ / static_cast<double>(std::size_t{1} << level_); }
  double time(std::size_t i) const { return step() * static_cast<double>(i); }

  std::span<double> node(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> node(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

  /// The same path seen only at the nodes of a coarser level.
  MeshPath coarsened(int level) const {
    detail::require(level >= 0 && level <= level_, "coarsened: level must not exceed the path level");
    MeshPath out(horizon_, level, dim_);
    const std::size_t stride = std::size_t{1} << (level_ - level);
    for (std::size_t i = 0; i < out.node_count(); ++i)
      std::copy_n(node(i * stride).begin(), dim_, out.node(i).begin());
    return out;
  }

  std::vector<double> at(double s) const {
    detail::require(s >= 0.0 && s <= horizon_, "mesh path evaluated outside [0, T]");
    const double u = s / step();
    auto i = std::min(static_cast<std::size_t>(u), node_count() - 2);
    const double w = u - static_cast<double>(i);
    std::vector<double> x(dim_);
    for (std::size_t k = 0; k < dim_; ++k) x[k] = (1.0 - w) * node(i)[k] + w * node(i + 1)[k];
    return x;
  }

 private:
  static int checked_level(int level) {
    detail::require(level >= 0 && level < 28, "mesh level out of range");
    return level;
  }

  double horizon_;
  int level_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Continuous-time simple random walk on epsilon Z^d, jumping to each of the
/// 2d neighbours at rate 1/(2 eps^2); its generator is (1/2) Delta_eps.
struct WalkParams {
  double epsilon = 1.0;
  int d = 1;

  double rate_per_neighbor() const { return 1.0 / (2.0 * epsilon * epsilon); }
  double total_rate() const { return d / (epsilon * epsilon); }
  void validate() const {
    detail::require(epsilon > 0.0 && std::isfinite(epsilon), "walk: epsilon must be positive");
    detail::require(d >= 1, "walk: dimension must be positive");
  }
};

inline WalkParams walk_params(const GridSpec& g) { return {g.epsilon(), g.d()}; }

using LatticePath = CadlagPath<LatticePoint>;

inline LatticePath sample_free_walk(const WalkParams& w, const LatticePoint& x, double T, Rng& rng) {
  w.validate();
  detail::require(T > 0.0, "free walk: T must be positive");
  detail::require(x.dim() == static_cast<std::size_t>(w.d), "free walk: start point has wrong dimension");
  LatticePath path(T, x);
  LatticePoint cur = x;
  double t = rng.exponential(w.total_rate());
  while (t < T) {
    const auto move = rng.below(2 * static_cast<std::uint64_t>(w.d));
    cur.coords[move / 2] += (move % 2 == 0) ? 1 : -1;
    path.push_jump(t, cur);
    t += rng.exponential(w.total_rate());
  }
  return path;
}

/// e^{-x} I_k(x) by its power series, truncated once the geometric tail
/// bound drops below 1e-15 of the partial sum.
inline double scaled_bessel_i(std::int64_t k, double x) {
  detail::require(x >= 0.0, "scaled_bessel_i: argument must be non-negative");
  k = k < 0 ? -k : k;
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  const double half_log = std::log(0.5 * x);
  const auto kd = static_cast<double>(k);
  double sum = 0.0;
  for (std::int64_t m = 0;; ++m) {
    const auto md = static_cast<double>(m);
    const double term = std::exp(-x + (2.0 * md + kd) * half_log - std::lgamma(md + 1.0) - std::lgamma(md + kd + 1.0));
    sum += term;
    const double ratio = 0.25 * x * x / ((md + 1.0) * (md + kd + 1.0));
    if (ratio < 0.5) {
      const double tail = term * ratio / (1.0 - ratio);
      if (tail <= 1e-15 * sum) break;
    }
    if (m > 100000) throw numerical_error("scaled_bessel_i: series did not converge");
  }
  return sum;
}

/// P(walk displacement after time T equals j) = prod_i e^{-T/eps^2} I_{|j_i|}(T/eps^2).
inline double walk_transition(const WalkParams& w, std::span<const std::int64_t> j, double T) {
  w.validate();
  detail::require(T > 0.0, "walk_transition: T must be positive");
  detail::require(j.size() == static_cast<std::size_t>(w.d), "walk_transition: displacement has wrong dimension");
  const double x = T / (w.epsilon * w.epsilon);
  double p = 1.0;
  for (auto ji : j) p *= scaled_bessel_i(ji, x);
  return p;
}

inline double walk_transition(const WalkParams& w, const LatticePoint& a, const LatticePoint& b, double T) {
  detail::require(a.dim() == b.dim(), "walk_transition: dimension mismatch");
  std::vector<std::int64_t> j(a.dim());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = b.coords[i] - a.coords[i];
  return walk_transition(w, j, T);
}

namespace detail {

/// Samples n_minus given n_plus - n_minus = D for independent Poisson(mu)
/// counts: P(n_minus = m) ∝ mu^{2m} / (m! (m + D)!).
inline std::int64_t sample_conditioned_minus_count(std::int64_t D, double mu, Rng& rng) {
  const std::int64_t m0 = std::max<std::int64_t>(0, -D);
  auto logw = [&](std::int64_t m) {
    const auto md = static_cast<double>(m);
    return 2.0 * md * std::log(mu) - std::lgamma(md + 1.0) - std::lgamma(md + static_cast<double>(D) + 1.0);
  };
  // mode of the weights, then all mass within 1e-18 relative on either side
  const double disc = static_cast<double>(D * D) + 4.0 * mu * mu;
  auto mode = std::max(m0, static_cast<std::int64_t>(std::floor(0.5 * (-static_cast<double>(D) + std::sqrt(disc)))));
  const double top = logw(mode);
  std::int64_t lo = mode, hi = mode;
  while (lo > m0 && logw(lo - 1) - top > -42.0) --lo;
  while (logw(hi + 1) - top > -42.0) ++hi;
  std::vector<double> w(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t m = lo; m <= hi; ++m) w[static_cast<std::size_t>(m - lo)] = std::exp(logw(m) - top);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return lo + static_cast<std::int64_t>(i);
    u -= w[i];
  }
  return hi;
}

inline std::vector<double> sorted_uniform_times(std::size_t n, double T, Rng& rng) {
  std::vector<double> times(n);
  for (auto& t : times) t = rng.uniform_open() * T;
  std::sort(times.begin(), times.end());
  for (std::size_t i = 1; i < n; ++i)
    if (times[i] <= times[i - 1]) times[i] = std::nextafter(times[i - 1], T);
  return times;
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace detail

/// Free walk conditioned on w(0) = a and w(T) = b, exact in law: per-axis
/// jump counts from their conditional law, jump order a uniform permutation
/// of the multiset of moves, jump times uniform order statistics.
inline LatticePath sample_walk_bridge(const WalkParams& w, const LatticePoint& a, const LatticePoint& b, double T,
                                      Rng& rng) {
  w.validate();
  detail::require(T > 0.0, "walk bridge: T must be positive");
  detail::require(a.dim() == static_cast<std::size_t>(w.d) && b.dim() == a.dim(),
                  "walk bridge: endpoints have wrong dimension");
  const double mu = T * w.rate_per_neighbor();
  std::vector<std::pair<int, int>> moves;  // (axis, +-1)
  for (int axis = 0; axis < w.d; ++axis) {
    const std::int64_t D = b.coords[static_cast<std::size_t>(axis)] - a.coords[static_cast<std::size_t>(axis)];
    const std::int64_t minus = detail::sample_conditioned_minus_count(D, mu, rng);
    const std::int64_t plus = minus + D;
    for (std::int64_t i = 0; i < plus; ++i) moves.emplace_back(axis, 1);
    for (std::int64_t i = 0; i < minus; ++i) moves.emplace_back(axis, -1);
  }
  detail::shuffle(moves, rng);
  const auto times = detail::sorted_uniform_times(moves.size(), T, rng);
  LatticePath path(T, a);
  LatticePoint cur = a;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    cur.coords[static_cast<std::size_t>(moves[i].first)] += moves[i].second;
    path.push_jump(times[i], cur);
  }
  return path;
}

/// Brownian bridge on the dyadic mesh of level J by midpoint displacement.
inline MeshPath sample_brownian_bridge(std::span<const double> x, std::span<const double> y, double T, int J,
                                       Rng& rng) {
  detail::require(T > 0.0, "brownian bridge: T must be positive");
  detail::require(J >= 1, "brownian bridge: level must be at least 1");
  detail::require(x.size() == y.size() && !x.empty(), "brownian bridge: endpoint dimension mismatch");
  MeshPath path(T, J, x.size());
  const std::size_t last = path.node_count() - 1;
  std::copy(x.begin(), x.end(), path.node(0).begin());
  std::copy(y.begin(), y.end(), path.node(last).begin());
  for (std::size_t span = last; span > 1; span /= 2) {
    const double sd = std::sqrt(path.step() * static_cast<double>(span) / 4.0);
    for (std::size_t lo = 0; lo < last; lo += span) {
      const std::size_t mid = lo + span / 2;
      for (std::size_t k = 0; k < x.size(); ++k)
        path.node(mid)[k] = 0.5 * (path.node(lo)[k] + path.node(lo + span)[k]) + sd * rng.normal();
    }
  }
  return path;
}

/// Exact integral of a state functional along a step path.
template <class State, class Fn>
double integrate_potential(const CadlagPath<State>& path, Fn&& potential) {
  double total = 0.0;
  for (std::size_t i = 0; i < path.states().size(); ++i) {
    const double v = potential(path.states()[i]);
    if (!std::isfinite(v)) throw invalid_argument("potential is not evaluable along the path");
    total += v * path.holding_time(i);
  }
  return total;
}

/// Lattice path with physical positions epsilon * coords.
inline double integrate_potential(const LatticePath& path, const PotentialSpec& v, double epsilon) {
  std::vector<double> x;
  return integrate_potential(path, [&](const LatticePoint& p) {
    x.resize(p.dim());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = epsilon * static_cast<double>(p.coords[i]);
    return v(x);
  });
}

/// Trapezoid rule on the mesh.
inline double integrate_potential(const MeshPath& path, const PotentialSpec& v) {
  double total = 0.0;
  double prev = v(path.node(0));
  for (std::size_t i = 1; i < path.node_count(); ++i) {
    const double cur = v(path.node(i));
    total += 0.5 * (prev + cur);
    prev = cur;
  }
  if (!std::isfinite(total)) throw invalid_argument("potential is not evaluable along the path");
  return total * path.step();
}

namespace detail {

template <class State, class Metric>
double j1_directed(const CadlagPath<State>& p, const CadlagPath<State>& q, const std::vector<double>& grid,
                   Metric& dist, std::size_t window) {
  const std::size_t K = grid.size() - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best((K + 1) * (K + 1), inf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return best[i * (K + 1) + j]; };
  at(0, 0) = 0.0;

  // sup over s in [g_i, g_i2) of dist(p(lambda(s)), q(s)), lambda linear
  // from [g_i, g_i2] onto [g_j, g_j2]; both sides are constant between the
  // breakpoints collected below, so interior midpoints suffice.
  std::vector<double> cuts;
  auto segment = [&](std::size_t i, std::size_t i2, std::size_t j, std::size_t j2) {
    const double s0 = grid[i], s1 = grid[i2], u0 = grid[j], u1 = grid[j2];
    const double scale = (s1 - s0) / (u1 - u0);
    cuts.assign({s0, s1});
    for (double t : q.jump_times())
      if (t > s0 && t < s1) cuts.push_back(t);
    for (double t : p.jump_times())
      if (t > u0 && t < u1) cuts.push_back(s0 + (t - u0) * scale);
    std::sort(cuts.begin(), cuts.end());
    double worst = std::max(std::abs(s0 - u0), std::abs(s1 - u1));
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      if (!(cuts[c + 1] > cuts[c])) continue;
      const double s = 0.5 * (cuts[c] + cuts[c + 1]);
      const double u = std::clamp(u0 + (s - s0) / scale, u0, u1);
      worst = std::max(worst, dist(p.at(u), q.at(s)));
    }
    return worst;
  };

  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j) {
      const double here = at(i, j);
      if (here == inf) continue;
      auto relax = [&](std::size_t i2, std::size_t j2) {
        if (i2 > K || j2 > K) return;
        if ((i2 == K) != (j2 == K)) return;
        const double c = std::max(here, segment(i, i2, j, j2));
        if (c < at(i2, j2)) at(i2, j2) = c;
      };
      relax(i + 1, j + 1);
      for (std::size_t c = 2; c <= window; ++c) {
        relax(i + 1, j + c);
        relax(i + c, j + 1);
      }
    }
  return at(K, K);
}

}  // namespace detail

/// Upper bound on the Skorokhod J1 distance
///   inf_lambda max(||lambda - id||, ||p o lambda - q||)
/// over piecewise-linear time changes whose breakpoints lie on the merged
/// jump times refined M-fold. Never larger than the uniform distance
/// (the identity is admissible) and symmetric in (p, q).
template <class State, class Metric>
double j1_distance_upper(const CadlagPath<State>& p, const CadlagPath<State>& q, int M, Metric dist) {
  detail::require(p.horizon() == q.horizon(), "j1_distance_upper: horizon mismatch");
  detail::require(M >= 1, "j1_distance_upper: refinement must be positive");
  std::vector<double> knots{0.0, p.horizon()};
  knots.insert(knots.end(), p.jump_times().begin(), p.jump_times().end());
  knots.insert(knots.end(), q.jump_times().begin(), q.jump_times().end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<double> grid;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    for (int r = 0; r < M; ++r)
      grid.push_back(knots[i] + (knots[i + 1] - knots[i]) * static_cast<double>(r) / M);
  grid.push_back(p.horizon());
  const auto window = static_cast<std::size_t>(4 * M);
  auto flipped = [&](const State& a, const State& b) { return dist(b, a); };
  return std::min(detail::j1_directed(p, q, grid, dist, window), detail::j1_directed(q, p, grid, flipped, window));
}

/// Euclidean distance in physical units for lattice paths.
inline double j1_distance_upper(const LatticePath& p, const LatticePath& q, int M, double epsilon = 1.0) {
  return j1_distance_upper(p, q, M, [epsilon](const LatticePoint& a, const LatticePoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      const double d = epsilon * static_cast<double>(a.coords[i] - b.coords[i]);
      s += d * d;
    }
    return std::sqrt(s);
  });
}

/// sup_s dist(p(s), q(s)) for step paths on a common horizon.
template <class State, class Metric>
double uniform_distance(const CadlagPath<State>& p, const CadlagPath<State>& q, Metric dist) {
  detail::require(p.horizon() == q.horizon(), "uniform_distance: horizon mismatch");
  std::vector<double> cuts{0.0, p.horizon()};
  cuts.insert(cuts.end(), p.jump_times().begin(), p.jump_times().end());
  cuts.insert(cuts.end(), q.jump_times().begin(), q.jump_times().end());
  std::sort(cuts.begin(), cuts.end());
  double worst = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
    if (cuts[c + 1] > cuts[c]) {
      const double s = 0.5 * (cuts[c] + cuts[c + 1]);
      worst = std::max(worst, dist(p.at(s), q.at(s)));
    }
  return worst;
}

/// Monte Carlo mean of f(w(s)) over sampled paths, with standard error.
template <class Path, class Fn>
SampleMoments marginal_statistics(std::span<const Path> samples, double s, Fn&& f) {
  detail::require(!samples.empty(), "marginal_statistics: empty sample set");
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& path : samples) {
    detail::require(s >= 0.0 && s <= path.horizon(), "marginal_statistics: time outside [0, T]");
    values.push_back(static_cast<double>(f(path.at(s))));
  }
  return sample_moments(values);
}

template <class Path, class Fn>
SampleMoments marginal_statistics(const std::vector<Path>& samples, double s, Fn&& f) {
  return marginal_statistics(std::span<const Path>(samples), s, std::forward<Fn>(f));
}

}  // namespace sklab
