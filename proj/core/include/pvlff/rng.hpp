// Copyright 2026 The PVLFF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pvlff {

// Deterministic random source. Wraps std::mt19937_64 but implements all
// distributions by hand: the standard library does not pin down the
// algorithms behind uniform_int_distribution / normal_distribution, so
// relying on them would tie results to a particular libstdc++ version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent substream. splitmix64 scrambles (seed, salt) so
  // that nearby salts yield uncorrelated streams.
  Rng fork(std::uint64_t salt) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound) by Lemire's multiply-shift rejection.
  std::uint64_t next_below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices drawn from [0, n) via partial Fisher-Yates.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_of(std::uint64_t salt) const;

  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// splitmix64 finalizer; also used for seed derivation elsewhere.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pvlff
