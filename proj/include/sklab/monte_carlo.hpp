#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sklab/errors.hpp"
#include "sklab/rng.hpp"
#include "sklab/stats.hpp"

namespace sklab {

/// Seeding and execution of a Monte Carlo run. Results depend on
/// (seed, substreams, sample count) only; `threads` changes wall time.
struct MonteCarloConfig {
  std::uint64_t seed = 1;
  std::size_t substreams = 16;
  std::size_t threads = 1;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t substreams = 0;
};

/// Worker count from SKLAB_THREADS, falling back to 1.
inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("SKLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

namespace detail {

/// Runs body(block) for block in [0, blocks) on up to `threads` workers.
template <class Body>
void run_blocks(std::size_t blocks, std::size_t threads, Body&& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(blocks, 1));
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < blocks; b = next++) {
          try {
            body(b);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Draws n values, value i coming from substream floor(i * S / n) of `base`.
/// Each substream walks its contiguous block sequentially.
template <class Sampler>
std::vector<double> draw_samples(std::size_t n, const MonteCarloConfig& cfg, const Rng& base,
                                 Sampler&& sampler) {
  detail::require(n > 0, "sample count must be positive");
  detail::require(cfg.substreams > 0, "substream count must be positive");
  std::vector<double> values(n);
  const std::size_t streams = cfg.substreams;
  detail::run_blocks(streams, cfg.threads, [&](std::size_t s) {
    const std::size_t lo = s * n / streams;
    const std::size_t hi = (s + 1) * n / streams;
    Rng rng = base.substream(s);
    for (std::size_t i = lo; i < hi; ++i) values[i] = sampler(rng);
  });
  return values;
}

inline MCEstimate summarize(std::span<const double> values, const MonteCarloConfig& cfg) {
  const auto m = sample_moments(values);
  return {m.mean, m.std_error, values.size(), cfg.seed, cfg.substreams};
}

}  // namespace sklab
