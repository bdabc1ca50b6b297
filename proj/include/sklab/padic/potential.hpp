#pragma once

#include <cmath>
#include <span>

#include "sklab/errors.hpp"
#include "sklab/padic/number.hpp"
#include "sklab/potential.hpp"

namespace sklab::padic {

/// Potentials on Q_p must depend on x only through |x|; constants are
/// accepted too.
inline void require_padic_potential(const PotentialSpec& v) {
  if (!v.is_radial() && v.required_dim() > 0)
    throw invalid_argument("potential '" + v.text() + "' is not a function of |x| on Q_p");
}

inline double potential_at_norm(const PotentialSpec& v, double norm) {
  const double value = v.is_radial() ? v.radial(norm) : v(std::span<const double>{});
  if (!std::isfinite(value)) throw invalid_argument("potential '" + v.text() + "' is not finite at |x| = " +
                                                    std::to_string(norm));
  return value;
}

inline double potential_at(const PotentialSpec& v, const PadicNumber& x) { return potential_at_norm(v, x.norm()); }

}  // namespace sklab::padic
