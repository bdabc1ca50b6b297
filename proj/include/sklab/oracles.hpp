#pragma once

// Reference values computed independently of the library's own numerics:
// closed forms, brute-force enumerations and plain partial sums.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sklab/errors.hpp"

namespace sklab::oracles {

/// Tr e^{-tH} for H = (p^2 + q^2) / 2: sum_n e^{-t(n + 1/2)}.
inline double harmonic_trace(double t) { return std::exp(-0.5 * t) / (1.0 - std::exp(-t)); }

inline double harmonic_eigenvalue(int n) { return n + 0.5; }

/// Spectrum of the free reflecting 3-point stochastic Hamiltonian.
inline std::vector<double> free_stochastic_spectrum_n3(double epsilon) {
  const double c = 1.0 / (2.0 * epsilon * epsilon);
  return {0.0, c, 3.0 * c};
}

inline double poisson_pmf(std::int64_t k, double mu) {
  if (k < 0) return 0.0;
  return std::exp(static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0));
}

/// P(N+ - N- = j) for independent Poisson(mu) counts, by direct summation
/// over the pair of counts.
inline double skellam_pmf(std::int64_t j, double mu) {
  long double s = 0.0L;
  const auto start = j < 0 ? -j : 0;
  for (std::int64_t minus = start; minus < start + 400; ++minus) {
    const long double term = static_cast<long double>(poisson_pmf(minus + j, mu)) * poisson_pmf(minus, mu);
    s += term;
    if (minus > start + 10 && static_cast<double>(minus) > 4.0 * mu + 20.0 && term < 1e-22L * s) break;
  }
  return static_cast<double>(s);
}

/// One-axis transition probability of the walk with per-neighbour rate
/// 1 / (2 eps^2) over time T.
inline double walk_transition_1d(std::int64_t j, double T, double epsilon) {
  return skellam_pmf(j, T / (2.0 * epsilon * epsilon));
}

/// Law of the bridge midpoint z for a = b = 0 on one axis.
inline double walk_bridge_midpoint(std::int64_t z, double T, double epsilon) {
  const double half = walk_transition_1d(z, 0.5 * T, epsilon);
  return half * half / walk_transition_1d(0, T, epsilon);
}

/// Integral of chi(x xi) over |xi| = p^gamma for |x| = p^m, as a sum over
/// representatives of the unit sphere modulo p^R (x = p^{-m}, xi = p^{-gamma} u).
inline double brute_sphere_character_integral(std::uint32_t p, std::int64_t m, std::int64_t gamma) {
  const std::int64_t e = m + gamma;  // x xi = p^{-e} u
  const std::int64_t R = std::max<std::int64_t>(e, 1);
  std::int64_t modulus = 1;
  for (std::int64_t i = 0; i < R; ++i) modulus *= p;
  std::int64_t period = 1;
  for (std::int64_t i = 0; i < e; ++i) period *= p;
  std::complex<double> sum = 0.0;
  for (std::int64_t u = 0; u < modulus; ++u) {
    if (u % p == 0) continue;
    const double frac = e > 0 ? static_cast<double>(u % period) / static_cast<double>(period) : 0.0;
    sum += std::polar(1.0, 2.0 * std::numbers::pi * frac);
  }
  return sum.real() * std::pow(static_cast<double>(p), static_cast<double>(gamma)) / static_cast<double>(modulus);
}

/// f_{t,b}(0) as the partial sum over gamma in [lo, hi].
inline double padic_density_at_zero(std::uint32_t p, double b, double t, int lo = -60, int hi = 8) {
  long double s = 0.0L;
  for (int g = lo; g <= hi; ++g)
    s += std::pow(static_cast<long double>(p), g) * (1.0L - 1.0L / p) *
         std::exp(-static_cast<long double>(t) * std::pow(static_cast<long double>(p), g * b));
  return static_cast<double>(s);
}

/// f_{t,b} on |x| = p^m from the raw sphere-character series in extended
/// precision; absolute error around 1e-18 f(0).
inline double padic_density(std::uint32_t p, double b, double t, std::int64_t m) {
  const long double P = p;
  long double s = -std::pow(P, static_cast<long double>(-m)) *
                  std::exp(-static_cast<long double>(t) * std::pow(P, (1.0L - m) * b));
  for (std::int64_t g = -m;; --g) {
    const long double vol = std::pow(P, static_cast<long double>(g)) * (1.0L - 1.0L / P);
    s += vol * std::exp(-static_cast<long double>(t) * std::pow(P, static_cast<long double>(g) * b));
    if (std::pow(P, static_cast<long double>(g)) < 1e-19L * std::abs(s) || g < -m - 4000) break;
  }
  return static_cast<double>(s);
}

/// Law of |z| for the p-adic bridge midpoint with x = y = 0 on [0, 2h]:
/// P(|z| = p^m) = vol(S_m) f_h(m)^2 / f_{2h}(0).
inline double padic_bridge_midpoint(std::uint32_t p, double b, double h, std::int64_t m) {
  const double f = padic_density(p, b, h, m);
  return std::pow(static_cast<double>(p), static_cast<double>(m)) * (1.0 - 1.0 / p) * f * f /
         padic_density_at_zero(p, b, 2.0 * h, -200, 60);
}

/// Spectrum of the two-state Vladimirov Laplacian (p = 2, M = 0, M' = 1).
inline std::vector<double> vladimirov_two_state_spectrum(double b) { return {0.0, std::pow(2.0, b)}; }

}  // namespace sklab::oracles
