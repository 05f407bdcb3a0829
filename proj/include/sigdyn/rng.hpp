// Copyright 2026 The sigdyn Authors
// SPDX-License-Identifier: Apache-2.0

// Counter-based random numbers.
//
// Every draw is a pure function of (master seed, stream id, counter), so a
// path's random sequence does not depend on which worker runs it or in what
// order. The mixing function is the SplitMix64 finalizer.
//
// Splitting rule:
//   stream_key(seed, stream) = mix(seed ^ mix(stream + φ))
//   bits(seed, stream, t)    = mix(stream_key + (t + 1)·φ)
// with φ = 0x9E3779B97F4A7C15. A uniform double in [0,1) keeps the top 53
// bits.

#pragma once

#include <cstdint>

namespace sigdyn {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(splitmix64_mix(master_seed ^ splitmix64_mix(stream + kGoldenGamma))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64_mix(key_ + (counter + 1) * kGoldenGamma);
  }

  /// Uniform in [0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

}  // namespace sigdyn
