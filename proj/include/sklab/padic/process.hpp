#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/paths.hpp"
#include "sklab/padic/density.hpp"
#include "sklab/padic/number.hpp"
#include "sklab/rng.hpp"

namespace sklab::padic {

using PadicPath = CadlagPath<PadicNumber>;

/// Draws X ~ f_{t,b}: radius from the radius law, then uniform digits on
/// that sphere.
class IncrementSampler {
 public:
  explicit IncrementSampler(const RadialDensitySpec& s, int precision = kDefaultPrecision)
      : radii_(s), precision_(precision) {
    detail::require(precision >= 1, "increment precision must be at least 1");
  }
  IncrementSampler(RadiusDistribution radii, int precision) : radii_(std::move(radii)), precision_(precision) {
    detail::require(precision >= 1, "increment precision must be at least 1");
  }

  PadicNumber operator()(Rng& rng) const {
    const std::int64_t m = radii_.sample(rng);
    return PadicNumber::random_on_sphere(radii_.spec().p, -m, precision_, rng);
  }

  const RadiusDistribution& radii() const { return radii_; }
  int precision() const { return precision_; }

 private:
  RadiusDistribution radii_;
  int precision_;
};

inline PadicNumber sample_increment(const RadialDensitySpec& s, int precision, Rng& rng) {
  return IncrementSampler(s, precision)(rng);
}

/// Step path through mesh values v_0..v_K at i T / K. Jumps sit at the mesh
/// times, except the last one which is placed half a step before T so the
/// value at T is v_K.
inline PadicPath mesh_to_path(const std::vector<PadicNumber>& values, double T) {
  detail::require(values.size() >= 2, "mesh path needs at least two values");
  const std::size_t K = values.size() - 1;
  const double dt = T / static_cast<double>(K);
  PadicPath path(T, values.front());
  for (std::size_t i = 1; i < K; ++i) path.push_jump(static_cast<double>(i) * dt, values[i]);
  path.push_jump(T - 0.5 * dt, values[K]);
  return path;
}

/// Values at i T / 2^J of the process started at x, by cumulative
/// independent increments.
inline std::vector<PadicNumber> sample_padic_mesh(const RadialDensitySpec& s, const PadicNumber& x, double T, int J,
                                                  Rng& rng, int precision = kDefaultPrecision) {
  detail::require(T > 0.0, "padic path: T must be positive");
  detail::require(J >= 0 && J <= 20, "padic path: level must lie in [0, 20]");
  detail::require(x.prime() == s.p, "padic path: prime mismatch");
  const std::size_t K = std::size_t{1} << J;
  const IncrementSampler inc(s.at_time(T / static_cast<double>(K)), precision);
  std::vector<PadicNumber> values;
  values.reserve(K + 1);
  values.push_back(x);
  for (std::size_t i = 0; i < K; ++i) values.push_back(values.back() + inc(rng));
  return values;
}

inline PadicPath sample_padic_path(const RadialDensitySpec& s, const PadicNumber& x, double T, int J, Rng& rng,
                                   int precision = kDefaultPrecision) {
  return mesh_to_path(sample_padic_mesh(s, x, T, J, rng, precision), T);
}

/// Midpoint proposals, with f1 = f_h(z - w1), f2 = f_h(w2 - z):
///  forward:   z = w1 + X_h, accepted with probability f2 / f_h(0).
///  two_sided: z = w1 + X_h or w2 + X_h at even odds, accepted with
///             probability f1 f2 / ((f1 + f2) f_h(w2 - w1)); the bound holds
///             since max(|z - w1|, |w2 - z|) >= |w2 - w1|.
enum class BridgeProposal { forward, two_sided };

/// Bridge from x to y on [0, T] by recursive bisection. The midpoint of a
/// span of length 2h with ends (w1, w2) has density proportional to
/// f_h(z - w1) f_h(w2 - z).
class PadicBridgeSampler {
 public:
  PadicBridgeSampler(const RadialDensitySpec& s, double T, int J, int precision = kDefaultPrecision,
                     BridgeProposal proposal = BridgeProposal::two_sided, std::size_t budget = 1'000'000)
      : spec_(s), T_(T), J_(J), proposal_(proposal), budget_(budget) {
    s.validate();
    detail::require(T > 0.0, "padic bridge: T must be positive");
    detail::require(J >= 0 && J <= 20, "padic bridge: level must lie in [0, 20]");
    detail::require(precision >= 1, "padic bridge: precision must be at least 1");
    for (int level = 1; level <= J; ++level) {
      const double h = T / static_cast<double>(std::size_t{1} << level);
      RadialDensity f(s.at_time(h));
      samplers_.emplace_back(f.radii(), precision);
      densities_.push_back(std::move(f));
    }
  }

  const RadialDensitySpec& spec() const { return spec_; }
  double horizon() const { return T_; }
  int level() const { return J_; }
  BridgeProposal proposal() const { return proposal_; }
  std::size_t budget() const { return budget_; }

  /// f_h with h = T / 2^level, level in [1, J].
  const RadialDensity& density(int level) const { return densities_.at(static_cast<std::size_t>(level - 1)); }

  /// Midpoint of a span at the given level (its half-length is T / 2^level).
  /// Adds the number of proposals made to *proposals when given.
  PadicNumber midpoint(int level, const PadicNumber& w1, const PadicNumber& w2, Rng& rng,
                       std::size_t* proposals = nullptr) const {
    const auto i = static_cast<std::size_t>(level - 1);
    const RadialDensity& f = densities_.at(i);
    const IncrementSampler& inc = samplers_[i];
    const double top = proposal_ == BridgeProposal::forward ? f.at_zero() : f.at(w2 - w1);
    for (std::size_t k = 1; k <= budget_; ++k) {
      bool accept = false;
      PadicNumber z = w1;
      if (proposal_ == BridgeProposal::forward) {
        z = w1 + inc(rng);
        accept = rng.uniform() * top < f.at(w2 - z);
      } else {
        const bool from_left = rng.below(2) == 0;
        z = (from_left ? w1 : w2) + inc(rng);
        const double f1 = f.at(z - w1), f2 = f.at(w2 - z);
        accept = rng.uniform() * (f1 + f2) * top < f1 * f2;
      }
      if (accept) {
        if (proposals) *proposals += k;
        return z;
      }
    }
    throw numerical_error("padic bridge: rejection budget of " + std::to_string(budget_) +
                          " proposals exhausted");
  }

  /// Bridge values at i T / 2^J.
  std::vector<PadicNumber> sample_mesh(const PadicNumber& x, const PadicNumber& y, Rng& rng,
                                       std::size_t* proposals = nullptr) const {
    detail::require(x.prime() == spec_.p && y.prime() == spec_.p, "padic bridge: prime mismatch");
    const std::size_t K = std::size_t{1} << J_;
    std::vector<PadicNumber> values(K + 1, x);
    values[K] = y;
    for (int level = 1; level <= J_; ++level) {
      const std::size_t stride = K >> (level - 1);
      for (std::size_t lo = 0; lo < K; lo += stride)
        values[lo + stride / 2] = midpoint(level, values[lo], values[lo + stride], rng, proposals);
    }
    return values;
  }

  PadicPath sample(const PadicNumber& x, const PadicNumber& y, Rng& rng) const {
    return mesh_to_path(sample_mesh(x, y, rng), T_);
  }

 private:
  RadialDensitySpec spec_;
  double T_;
  int J_;
  BridgeProposal proposal_;
  std::size_t budget_;
  std::vector<RadialDensity> densities_;
  std::vector<IncrementSampler> samplers_;
};

inline PadicPath sample_padic_bridge(const RadialDensitySpec& s, const PadicNumber& x, const PadicNumber& y, double T,
                                     int J, Rng& rng, int precision = kDefaultPrecision) {
  return PadicBridgeSampler(s, T, J, precision).sample(x, y, rng);
}

}  // namespace sklab::padic
