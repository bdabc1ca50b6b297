#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sklab/errors.hpp"
#include "sklab/padic/number.hpp"
#include "sklab/padic/potential.hpp"
#include "sklab/potential.hpp"
#include "sklab/qops.hpp"

namespace sklab::padic {

// Finite model of Q_p: the group G = p^{-M} Z_p / p^{M'} Z_p with elements
// x = p^{-M} X, X in [0, S), S = p^{M + M'}, and dual group elements
// xi = p^{-M'} Xi. The pairing is chi(x xi) = exp(2 pi i (X Xi mod S) / S).

inline constexpr std::int64_t kMaxVladimirovStates = 10000;

struct VladimirovSpec {
  std::uint32_t p = 2;
  double b = 1.0;
  int M = 0;
  int M_prime = 1;
  PotentialSpec V;

  void validate_shape() const {
    require_prime(p);
    detail::require(b > 0.0 && std::isfinite(b), "vladimirov: b must be positive");
    detail::require(M >= 0, "vladimirov: M must be >= 0");
    detail::require(M_prime >= 1, "vladimirov: M' must be >= 1");
    require_padic_potential(V);
  }

  void validate() const {
    validate_shape();
    detail::require(state_count() <= kMaxVladimirovStates,
                    "vladimirov: p^(M+M') = " + std::to_string(state_count()) + " exceeds " +
                        std::to_string(kMaxVladimirovStates) + " states");
  }

  /// p^{M+M'}, saturating above the dense limit.
  std::int64_t state_count() const {
    std::int64_t s = 1;
    for (int i = 0; i < M + M_prime; ++i) {
      s *= p;
      if (s > kMaxVladimirovStates) return kMaxVladimirovStates + 1;
    }
    return s;
  }

  /// The model with both exponents raised by one.
  VladimirovSpec refined() const {
    VladimirovSpec r = *this;
    ++r.M;
    ++r.M_prime;
    return r;
  }
};

namespace detail {

inline int valuation_of(std::int64_t n, std::uint32_t p) {
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

inline double real_power(std::uint32_t p, double e) { return std::pow(static_cast<double>(p), e); }

}  // namespace detail

/// |x| for x = p^{-M} X; 0 for the zero coset.
inline double group_norm(const VladimirovSpec& vs, std::int64_t X) {
  if (X == 0) return 0.0;
  return detail::real_power(vs.p, vs.M - detail::valuation_of(X, vs.p));
}

/// |xi| for xi = p^{-M'} Xi; 0 for the zero coset.
inline double dual_norm(const VladimirovSpec& vs, std::int64_t Xi) {
  if (Xi == 0) return 0.0;
  return detail::real_power(vs.p, vs.M_prime - detail::valuation_of(Xi, vs.p));
}

/// Representative p^{-M} X as a p-adic number.
inline PadicNumber group_element(const VladimirovSpec& vs, std::int64_t X, int precision = kDefaultPrecision) {
  return PadicNumber::from_integer(vs.p, X, precision) * PadicNumber::power_of_p(vs.p, -vs.M, precision);
}

/// Representative p^{-M'} Xi as a p-adic number.
inline PadicNumber dual_element(const VladimirovSpec& vs, std::int64_t Xi, int precision = kDefaultPrecision) {
  return PadicNumber::from_integer(vs.p, Xi, precision) * PadicNumber::power_of_p(vs.p, -vs.M_prime, precision);
}

/// Unitary Fourier matrix F[x, xi] = S^{-1/2} chi(x xi).
inline ComplexMatrix group_fourier_matrix(const VladimirovSpec& vs) {
  vs.validate();
  const std::int64_t S = vs.state_count();
  ComplexMatrix F(S, S);
  const double scale = 1.0 / std::sqrt(static_cast<double>(S));
  for (std::int64_t X = 0; X < S; ++X)
    for (std::int64_t Xi = 0; Xi < S; ++Xi)
      F(X, Xi) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>((X * Xi) % S) / static_cast<double>(S));
  return F;
}

/// Delta = F diag(|xi|^b) F^{-1}; real because the multiplier is even.
inline HermitianOperator vladimirov_laplacian(const VladimirovSpec& vs) {
  vs.validate();
  const std::int64_t S = vs.state_count();
  std::vector<double> g(static_cast<std::size_t>(S), 0.0);
  for (std::int64_t Xi = 1; Xi < S; ++Xi) {
    const double w = std::pow(dual_norm(vs, Xi), vs.b) / static_cast<double>(S);
    for (std::int64_t Z = 0; Z < S; ++Z)
      g[static_cast<std::size_t>(Z)] +=
          w * std::cos(2.0 * std::numbers::pi * static_cast<double>((Z * Xi) % S) / static_cast<double>(S));
  }
  RealMatrix D(S, S);
  for (std::int64_t X = 0; X < S; ++X)
    for (std::int64_t Y = 0; Y < S; ++Y) D(X, Y) = g[static_cast<std::size_t>(((X - Y) % S + S) % S)];
  return HermitianOperator(D);
}

inline HermitianOperator vladimirov_hamiltonian(const VladimirovSpec& vs) {
  const auto delta = vladimirov_laplacian(vs);
  const std::int64_t S = vs.state_count();
  RealVector v(S);
  for (std::int64_t X = 0; X < S; ++X) v(X) = potential_at_norm(vs.V, group_norm(vs, X));
  return delta + HermitianOperator::diagonal(v);
}

/// H restricted to radial functions, in the orthonormal basis
/// {1_0, 1_{S_m} / sqrt(#S_m) : m = -M'+1..M}. Exact for radial V, with
/// dimension M + M' + 1 regardless of the group size.
struct RadialVladimirovModel {
  std::vector<double> norms;  // |x| on each basis shell, 0 first
  RealMatrix H;
};

inline RadialVladimirovModel radial_vladimirov_model(const VladimirovSpec& vs) {
  vs.validate_shape();
  detail::require(vs.M + vs.M_prime <= 60, "vladimirov: M + M' too large for the radial model");
  const auto p = static_cast<double>(vs.p);
  const int M = vs.M, Mp = vs.M_prime;
  const int n = M + Mp + 1;
  const double log_S = (M + Mp) * std::log(p);
  // ball count B(r) = #{|x| <= p^r} = p^{r + M'}
  auto ball = [&](int r) { return r < -Mp ? 0.0 : std::pow(p, r + Mp); };

  RadialVladimirovModel out;
  out.norms.assign(static_cast<std::size_t>(n), 0.0);
  // Fourier image on dual sphere gamma of each basis vector, scaled by S^{1/2}
  // (the scale cancels against the dual sphere counts below).
  const int gamma_lo = -M + 1, gamma_hi = Mp;
  const int n_gamma = gamma_hi - gamma_lo + 1;
  RealMatrix hat(n, n_gamma);
  for (int gi = 0; gi < n_gamma; ++gi) hat(0, gi) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int m = -Mp + i;
    out.norms[static_cast<std::size_t>(i)] = std::pow(p, m);
    const double count = ball(m) - ball(m - 1);
    for (int gi = 0; gi < n_gamma; ++gi) {
      const int gamma = gamma_lo + gi;
      const double v = (gamma <= -m ? ball(m) : 0.0) - (gamma <= -m + 1 ? ball(m - 1) : 0.0);
      hat(i, gi) = v / std::sqrt(count);
    }
  }
  RealVector weight(n_gamma);
  for (int gi = 0; gi < n_gamma; ++gi) {
    const int gamma = gamma_lo + gi;
    // C_gamma p^{gamma b} / S
    weight(gi) = std::exp((M + gamma) * std::log(p) - log_S) * (1.0 - 1.0 / p) * std::pow(p, gamma * vs.b);
  }
  out.H = hat * weight.asDiagonal() * hat.transpose();
  for (int i = 0; i < n; ++i) out.H(i, i) += potential_at_norm(vs.V, out.norms[static_cast<std::size_t>(i)]);
  out.H = 0.5 * (out.H + out.H.transpose()).eval();
  return out;
}

/// Continuum kernel estimate K_T(0, 0) ~ p^{M'} (e^{-T H})[0, 0].
inline double vladimirov_kernel_at_origin(const VladimirovSpec& vs, double T) {
  detail::require(T > 0.0, "vladimirov kernel: T must be positive");
  const auto model = radial_vladimirov_model(vs);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(model.H);
  if (es.info() != Eigen::Success) throw numerical_error("vladimirov kernel: eigensolver failed");
  const auto& U = es.eigenvectors();
  const auto& lam = es.eigenvalues();
  double entry = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) entry += U(0, k) * U(0, k) * std::exp(-T * lam(k));
  return std::pow(static_cast<double>(vs.p), vs.M_prime) * entry;
}

struct VladimirovStability {
  VladimirovSpec coarse;
  double coarse_value = 0.0;
  double fine_value = 0.0;
  double change = 0.0;
};

/// Smallest (M, M' = M + offset) from `start` whose kernel at the origin
/// changes by less than `tolerance` under one refinement.
inline VladimirovStability stable_vladimirov_kernel(VladimirovSpec start, double T, double tolerance,
                                                    int max_refinements = 40) {
  VladimirovSpec vs = start;
  double value = vladimirov_kernel_at_origin(vs, T);
  for (int i = 0; i < max_refinements; ++i) {
    const auto next = vs.refined();
    const double next_value = vladimirov_kernel_at_origin(next, T);
    const double change = std::abs(next_value - value);
    if (change < tolerance) return {vs, value, next_value, change};
    vs = next;
    value = next_value;
  }
  throw numerical_error("vladimirov kernel did not stabilize to " + std::to_string(tolerance));
}

}  // namespace sklab::padic
