#pragma once

#include <cstdint>
#include <vector>

#include "r2csl/common.hpp"

namespace r2csl {

// splitmix64. Chosen over <random> engines because the whole pipeline must be
// bit-reproducible across platforms and standard-library implementations;
// std::uniform_real_distribution and friends make no such guarantee.
inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kSplitMixGamma;
    return splitmix_finalize(state_);
  }

  // [0, 1), 53 mantissa bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Inverse-CDF walk; deterministic given IEEE doubles. Probabilities that do
  // not quite sum to 1 resolve to the last index.
  int categorical(const double* probs, int n) {
    double u = uniform01();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

  int categorical(const std::vector<double>& probs) {
    return categorical(probs.data(), static_cast<int>(probs.size()));
  }

  // Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

// Stream splitting: substream k of a root seed starts from
// finalize(root + (k+1)*gamma). Episode i of a rollout uses stream i, sweep
// cells hash their key into k, etc. Documented so results can be recomputed
// in any language.
inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t k) {
  return splitmix_finalize(root + (k + 1) * kSplitMixGamma);
}

}  // namespace r2csl
