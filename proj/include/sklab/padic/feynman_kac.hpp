#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/monte_carlo.hpp"
#include "sklab/padic/density.hpp"
#include "sklab/padic/number.hpp"
#include "sklab/padic/potential.hpp"
#include "sklab/padic/process.hpp"
#include "sklab/potential.hpp"

namespace sklab::padic {

/// Left-endpoint Riemann sum of V over the mesh values v_0..v_{K-1}.
inline double riemann_potential(const std::vector<PadicNumber>& mesh, const PotentialSpec& v, double T) {
  const std::size_t K = mesh.size() - 1;
  const double dt = T / static_cast<double>(K);
  double total = 0.0;
  for (std::size_t i = 0; i < K; ++i) total += potential_at(v, mesh[i]) * dt;
  return total;
}

/// K_T(x, y) = f_T(x - y) E[exp(-int V)] over the bridge from x to y.
inline MCEstimate padic_fk_kernel(const PadicBridgeSampler& bridge, const PotentialSpec& v, const PadicNumber& x,
                                  const PadicNumber& y, std::size_t n, const MonteCarloConfig& cfg, const Rng& base) {
  require_padic_potential(v);
  const double T = bridge.horizon();
  const RadialDensity f_T(bridge.spec().at_time(T));
  const double free = f_T.at(x - y);
  const auto values = draw_samples(n, cfg, base, [&](Rng& rng) {
    return std::exp(-riemann_potential(bridge.sample_mesh(x, y, rng), v, T));
  });
  auto est = summarize(values, cfg);
  est.mean *= free;
  est.std_error *= free;
  return est;
}

inline MCEstimate padic_fk_kernel(const RadialDensitySpec& s, const PotentialSpec& v, double T, const PadicNumber& x,
                                  const PadicNumber& y, std::size_t n, int J, const MonteCarloConfig& cfg,
                                  int precision = kDefaultPrecision) {
  detail::require(J >= 1, "padic_fk_kernel: mesh level must be at least 1");
  const PadicBridgeSampler bridge(s, T, J, precision);
  return padic_fk_kernel(bridge, v, x, y, n, cfg, Rng(cfg.seed));
}

}  // namespace sklab::padic
