#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "sklab/errors.hpp"
#include "sklab/lattice.hpp"
#include "sklab/potential.hpp"

namespace sklab {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;

/// Dense self-adjoint matrix. Construction checks Hermiticity to
/// 1e-12 * max|A| and stores the exactly symmetrized (A + A^*) / 2.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(ComplexMatrix a) {
    detail::require(a.rows() == a.cols(), "operator must be square");
    const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    const double asym = a.size() ? (a - a.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    if (asym > kHermitianTolerance * std::max(scale, 1e-300))
      throw invalid_argument("operator is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    m_ = 0.5 * (a + a.adjoint());
  }

  explicit HermitianOperator(const RealMatrix& a) : HermitianOperator(ComplexMatrix(a.cast<std::complex<double>>())) {}

  static HermitianOperator diagonal(const RealVector& d) {
    HermitianOperator h;
    h.m_ = d.cast<std::complex<double>>().asDiagonal();
    return h;
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  std::complex<double> operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  double trace() const { return m_.trace().real(); }
  bool is_real() const { return m_.imag().cwiseAbs().maxCoeff() == 0.0; }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    detail::require(a.dim() == b.dim(), "operator dimension mismatch");
    HermitianOperator h;
    h.m_ = a.m_ + b.m_;
    return h;
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    HermitianOperator h;
    h.m_ = s * a.m_;
    return h;
  }
  /// A^2, symmetrized.
  HermitianOperator squared() const { return HermitianOperator(ComplexMatrix(m_ * m_)); }

 private:
  ComplexMatrix m_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  ComplexMatrix eigenvectors;
};

inline SpectralDecomposition eigendecompose(const HermitianOperator& a) {
  SpectralDecomposition s;
  if (a.is_real()) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a.matrix().real());
    if (solver.info() != Eigen::Success) throw numerical_error("eigendecompose: solver did not converge");
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors().cast<std::complex<double>>();
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
    if (solver.info() != Eigen::Success) throw numerical_error("eigendecompose: solver did not converge");
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
  }
  return s;
}

/// Checked variant for raw matrices: rejects non-Hermitian input.
inline SpectralDecomposition eigendecompose(const ComplexMatrix& a) { return eigendecompose(HermitianOperator(a)); }

inline RealVector eigenvalues(const HermitianOperator& a) {
  if (a.is_real()) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a.matrix().real(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// e^{-tA} = U e^{-t Lambda} U^*.
inline HermitianOperator semigroup(const HermitianOperator& a, double t) {
  detail::require(t > 0.0, "semigroup: t must be positive");
  const auto s = eigendecompose(a);
  const RealVector w = (-t * s.eigenvalues.array()).exp();
  return HermitianOperator(ComplexMatrix(s.eigenvectors * w.cast<std::complex<double>>().asDiagonal() *
                                         s.eigenvectors.adjoint()));
}

/// ||A - B||_1: sum of absolute eigenvalues of the Hermitian difference.
inline double trace_norm_distance(const HermitianOperator& a, const HermitianOperator& b) {
  detail::require(a.dim() == b.dim(), "trace_norm_distance: dimension mismatch");
  HermitianOperator diff(ComplexMatrix(a.matrix() - b.matrix()));
  return eigenvalues(diff).cwiseAbs().sum();
}

namespace detail {

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// I (x) ... (x) A (x) ... (x) I with A on `axis`, axis 0 slowest.
inline ComplexMatrix embed_axis(const ComplexMatrix& a, int axis, int d) {
  const auto n = a.rows();
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i = 0; i < d; ++i) out = kron(out, i == axis ? a : ComplexMatrix(ComplexMatrix::Identity(n, n)));
  return out;
}

/// Centered one-axis DFT: F[j,l] = N^{-1/2} exp(2 pi i j l / N), j,l in [-k,k].
inline ComplexMatrix dft_axis(const GridSpec& g) {
  const int n = g.N();
  const int k = g.k();
  ComplexMatrix f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = -k; j <= k; ++j)
    for (int l = -k; l <= k; ++l) {
      // reduce j*l mod N before scaling to keep the phase exact
      const long long r = (static_cast<long long>(j) * l) % n;
      f(j + k, l + k) = std::polar(norm, 2.0 * std::numbers::pi * static_cast<double>(r) / n);
    }
  return f;
}

inline ComplexMatrix position_axis(const GridSpec& g) {
  RealVector d(g.N());
  for (int j = -g.k(); j <= g.k(); ++j) d(j + g.k()) = g.position(j);
  return d.cast<std::complex<double>>().asDiagonal();
}

inline RealVector potential_diagonal(const GridSpec& g, const PotentialSpec& v) {
  RealVector diag(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(index_point(g, i));
    diag(static_cast<Eigen::Index>(i)) = v(x);
    if (!std::isfinite(diag(static_cast<Eigen::Index>(i))))
      throw invalid_argument("potential '" + v.text() + "' is not finite on the grid");
  }
  return diag;
}

}  // namespace detail

inline std::vector<HermitianOperator> position_operators(const GridSpec& g) {
  std::vector<HermitianOperator> ops;
  const ComplexMatrix q = detail::position_axis(g);
  for (int axis = 0; axis < g.d(); ++axis) ops.emplace_back(detail::embed_axis(q, axis, g.d()));
  return ops;
}

/// Tensor product of the centered per-axis DFT; unitary.
inline ComplexMatrix dft_matrix(const GridSpec& g) {
  const ComplexMatrix f = detail::dft_axis(g);
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i = 0; i < g.d(); ++i) out = detail::kron(out, f);
  return out;
}

/// p_i = F q_i F^{-1}, built per axis and embedded.
inline std::vector<HermitianOperator> momentum_operators(const GridSpec& g) {
  const ComplexMatrix f = detail::dft_axis(g);
  const ComplexMatrix p = f * detail::position_axis(g) * f.adjoint();
  std::vector<HermitianOperator> ops;
  for (int axis = 0; axis < g.d(); ++axis) ops.emplace_back(detail::embed_axis(p, axis, g.d()));
  return ops;
}

/// (1/2) sum_i p_i^2 + V(q).
inline HermitianOperator schwinger_hamiltonian(const GridSpec& g, const PotentialSpec& v) {
  const ComplexMatrix f = detail::dft_axis(g);
  const ComplexMatrix p = f * detail::position_axis(g) * f.adjoint();
  const ComplexMatrix kinetic_axis = 0.5 * p * p;
  ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  for (int axis = 0; axis < g.d(); ++axis) h += detail::embed_axis(kinetic_axis, axis, g.d());
  h.diagonal() += detail::potential_diagonal(g, v).cast<std::complex<double>>();
  return HermitianOperator(h);
}

/// -(1/2) Delta_eps + V with reflecting truncation: a missing neighbour drops
/// both its off-diagonal coupling and its diagonal share, so rows of the
/// kinetic part sum to zero.
inline HermitianOperator stochastic_hamiltonian(const GridSpec& g, const PotentialSpec& v) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const double c = 1.0 / (2.0 * g.epsilon() * g.epsilon());
  RealMatrix h = RealMatrix::Zero(n, n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GridPoint p = index_point(g, i);
    for (int axis = 0; axis < g.d(); ++axis)
      for (int step : {-1, 1}) {
        GridPoint q = p;
        q.coords[static_cast<std::size_t>(axis)] += step;
        if (!g.contains(q)) continue;
        const auto j = point_index(g, q);
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -= c;
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += c;
      }
  }
  h.diagonal() += detail::potential_diagonal(g, v);
  return HermitianOperator(h);
}

/// Mehler kernel of H = (p^2 + q^2)/2.
inline double mehler_kernel(double x, double y, double t) {
  const double sh = std::sinh(t);
  return std::exp(-((x * x + y * y) * std::cosh(t) - 2.0 * x * y) / (2.0 * sh)) /
         std::sqrt(2.0 * std::numbers::pi * sh);
}

/// M[a,b] = eps * K_t(x_a, x_b), the grid sampling of e^{-tH} for the
/// one-dimensional harmonic oscillator.
inline HermitianOperator mehler_reference(const GridSpec& g, double t) {
  detail::require(g.d() == 1, "mehler_reference: only d = 1 is supported");
  detail::require(t > 0.0, "mehler_reference: t must be positive");
  const int n = g.N();
  RealMatrix m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b <= a; ++b) {
      const double v = g.epsilon() * mehler_kernel(g.position(a - g.k()), g.position(b - g.k()), t);
      m(a, b) = v;
      m(b, a) = v;
    }
  return HermitianOperator(m);
}

}  // namespace sklab
