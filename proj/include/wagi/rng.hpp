#pragma once

#include <cstdint>

#include "wagi/tensor.hpp"

namespace wagi {

/// Counter-based generator: the n-th draw is a pure function of
/// (seed, stream, n), so results never depend on how work is chunked.
/// split() derives an independent stream without consuming draws.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer uniform on [lo, hi].
  int uniform_int(int lo, int hi);
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal();

  CounterRng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

Tensor normal_tensor(Shape shape, CounterRng& rng, double mean = 0.0, double stddev = 1.0);
Tensor uniform_tensor(Shape shape, CounterRng& rng, double lo = 0.0, double hi = 1.0);

}  // namespace wagi
