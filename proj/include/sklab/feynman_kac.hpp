#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/grid_walk.hpp"
#include "sklab/lattice.hpp"
#include "sklab/monte_carlo.hpp"
#include "sklab/paths.hpp"
#include "sklab/potential.hpp"
#include "sklab/qops.hpp"
#include "sklab/stats.hpp"

namespace sklab {

// Kernel convention throughout: K(a, b) = (free kernel at (a, b)) times the
// expectation of exp(-int V) under the normalized bridge measure.

namespace detail {

inline MCEstimate scale(MCEstimate e, double factor) {
  e.mean *= factor;
  e.std_error *= factor;
  return e;
}

}  // namespace detail

/// K_{N,T}(a, b) on the infinite lattice epsilon Z^d.
inline MCEstimate fk_kernel_lattice(const WalkParams& w, const PotentialSpec& v, double T, const LatticePoint& a,
                                    const LatticePoint& b, std::size_t n, const MonteCarloConfig& cfg) {
  detail::require(T > 0.0, "fk_kernel_lattice: T must be positive");
  const double free = walk_transition(w, a, b, T);
  const auto values = draw_samples(n, cfg, Rng(cfg.seed), [&](Rng& rng) {
    const auto path = sample_walk_bridge(w, a, b, T, rng);
    return std::exp(-integrate_potential(path, v, w.epsilon));
  });
  return detail::scale(summarize(values, cfg), free);
}

/// K*_{N,T}(a, b) for the walk confined to the finite grid (grid indices).
inline MCEstimate fk_kernel_grid(const GridWalkChain& chain, const PotentialSpec& v, double T, std::size_t a,
                                 std::size_t b, std::size_t n, const MonteCarloConfig& cfg, const Rng& base) {
  const auto table = chain.bridge_table(b, T);
  const double free = chain.transition(table, a);
  const double eps = chain.grid().epsilon();
  const auto values = draw_samples(n, cfg, base, [&](Rng& rng) {
    const auto path = chain.sample_bridge(table, a, rng);
    return std::exp(-integrate_potential(path, v, eps));
  });
  return detail::scale(summarize(values, cfg), free);
}

inline MCEstimate fk_kernel_grid(const GridSpec& g, const PotentialSpec& v, double T, const GridPoint& a,
                                 const GridPoint& b, std::size_t n, const MonteCarloConfig& cfg) {
  const GridWalkChain chain(g);
  return fk_kernel_grid(chain, v, T, point_index(g, a), point_index(g, b), n, cfg, Rng(cfg.seed));
}

struct TraceEstimate {
  MCEstimate total;
  std::vector<MCEstimate> diagonal;  // K*(a, a) per grid index
};

/// Sum over grid points of independent diagonal kernel estimates; point a
/// draws from substream a of the seed.
inline TraceEstimate fk_trace_by_point(const GridSpec& g, const PotentialSpec& v, double T, std::size_t n,
                                       const MonteCarloConfig& cfg) {
  detail::require(T > 0.0, "fk_trace: T must be positive");
  const GridWalkChain chain(g);
  const Rng root(cfg.seed);
  TraceEstimate out;
  out.diagonal.reserve(g.size());
  std::vector<double> means(g.size()), variances(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    out.diagonal.push_back(fk_kernel_grid(chain, v, T, a, a, n, cfg, root.substream(a)));
    means[a] = out.diagonal.back().mean;
    variances[a] = out.diagonal.back().std_error * out.diagonal.back().std_error;
  }
  out.total = {pairwise_sum(means), std::sqrt(pairwise_sum(variances)), n * g.size(), cfg.seed, cfg.substreams};
  return out;
}

inline MCEstimate fk_trace(const GridSpec& g, const PotentialSpec& v, double T, std::size_t n,
                           const MonteCarloConfig& cfg) {
  return fk_trace_by_point(g, v, T, n, cfg).total;
}

inline double gaussian_kernel(std::span<const double> x, std::span<const double> y, double T) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
  const double d = static_cast<double>(x.size());
  return std::pow(2.0 * std::numbers::pi * T, -0.5 * d) * std::exp(-r2 / (2.0 * T));
}

/// K_T(x, y) in the continuum: Gaussian kernel times the Brownian-bridge
/// expectation, with the action integrated by the trapezoid rule at level J.
inline MCEstimate fk_kernel_continuum(const PotentialSpec& v, double T, std::span<const double> x,
                                      std::span<const double> y, std::size_t n, int J, const MonteCarloConfig& cfg) {
  detail::require(T > 0.0, "fk_kernel_continuum: T must be positive");
  detail::require(x.size() == y.size() && !x.empty(), "fk_kernel_continuum: endpoint dimension mismatch");
  const double free = gaussian_kernel(x, y, T);
  const auto values = draw_samples(n, cfg, Rng(cfg.seed), [&](Rng& rng) {
    const auto path = sample_brownian_bridge(x, y, T, J, rng);
    return std::exp(-integrate_potential(path, v));
  });
  return detail::scale(summarize(values, cfg), free);
}

/// Kolmogorov distance between the law of the lattice-bridge midpoint
/// (a = b = 0 on epsilon Z^d, axis 0, physical units) and the Brownian
/// bridge midpoint law N(0, T/4).
inline double bridge_midpoint_gap(const WalkParams& w, double T, std::size_t n, const MonteCarloConfig& cfg,
                                  const Rng& base) {
  const LatticePoint origin{std::vector<std::int64_t>(static_cast<std::size_t>(w.d), 0)};
  auto mid = draw_samples(n, cfg, base, [&](Rng& rng) {
    const auto path = sample_walk_bridge(w, origin, origin, T, rng);
    return w.epsilon * static_cast<double>(path.at(0.5 * T).coords[0]);
  });
  const double sigma = std::sqrt(T / 4.0);
  return kolmogorov_distance(std::move(mid), [sigma](double x) { return normal_cdf(x, sigma); });
}

inline double bridge_midpoint_gap(const WalkParams& w, double T, std::size_t n, const MonteCarloConfig& cfg) {
  return bridge_midpoint_gap(w, T, n, cfg, Rng(cfg.seed));
}

struct ConvergenceRow {
  int N = 0;
  double epsilon = 0.0;
  double exact_trace = 0.0;
  MCEstimate mc_trace;
  std::optional<double> trace_norm_gap;  // harmonic V in d = 1 only
  double marginal_gap = 0.0;
};

/// Per N: exact trace of e^{-T H*_N}, its Monte Carlo estimate, the trace
/// norm distance of e^{-T H*_N} to the sampled Mehler kernel, and the
/// bridge-midpoint Kolmogorov gap.
inline std::vector<ConvergenceRow> convergence_experiment(const PotentialSpec& v, double T,
                                                          std::span<const int> n_list, std::size_t n,
                                                          const MonteCarloConfig& cfg, int d = 1) {
  detail::require(!n_list.empty(), "convergence_experiment: empty N list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    detail::require(n_list[i] % 2 == 1, "convergence_experiment: N values must be odd");
    detail::require(i == 0 || n_list[i] > n_list[i - 1], "convergence_experiment: N values must ascend");
  }
  std::vector<ConvergenceRow> rows;
  const Rng root(cfg.seed);
  for (int N : n_list) {
    const auto g = make_grid(N, d);
    ConvergenceRow row;
    row.N = N;
    row.epsilon = g.epsilon();
    const auto h = stochastic_hamiltonian(g, v);
    const auto e = semigroup(h, T);
    row.exact_trace = e.trace();
    MonteCarloConfig sub = cfg;
    sub.seed = root.substream(static_cast<std::uint64_t>(N)).key();
    row.mc_trace = fk_trace(g, v, T, n, sub);
    row.mc_trace.seed = cfg.seed;
    if (d == 1 && v.is_harmonic(1)) row.trace_norm_gap = trace_norm_distance(e, mehler_reference(g, T));
    row.marginal_gap =
        bridge_midpoint_gap(walk_params(g), T, n, cfg, root.substream((std::uint64_t{1} << 32) + static_cast<std::uint64_t>(N)));
    if (!std::isfinite(row.exact_trace) || !std::isfinite(row.mc_trace.mean) || !std::isfinite(row.marginal_gap))
      throw numerical_error("convergence_experiment: non-finite result at N = " + std::to_string(N));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sklab
