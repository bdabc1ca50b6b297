#pragma once

#include <stdexcept>
#include <string>

namespace sklab {

// Rejected input: bad parameters, malformed specs, out-of-range indices.
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that could not produce a trustworthy number
// (non-convergent series, exhausted rejection budget, non-finite result).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// p-adic operation whose answer depends on digits that are not tracked.
class precision_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw invalid_argument(what);
}

}  // namespace detail
}  // namespace sklab
