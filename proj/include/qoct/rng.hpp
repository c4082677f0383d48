#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace qoct {

// Splittable counter-free PRNG built on the SplitMix64 finalizer. A stream is
// addressed by (seed, key, key, ...) via child(), so independent consumers can
// derive their own streams without sharing mutable state. Draw order within a
// stream is sequential; streams with different key paths are uncorrelated for
// any practical purpose.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  RngStream child(std::uint64_t key) const {
    return RngStream(FromState{}, mix(state_ ^ mix(key + kGolden)));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller. Two uniforms per draw, no caching, so the
  // stream position is a pure function of the number of calls.
  double next_normal() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Draws `shots` samples from the distribution given by `probs` (assumed
  // nonnegative; normalized internally) and returns per-category counts.
  std::vector<std::uint64_t> multinomial(std::uint64_t shots, std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += (p > 0.0 ? p : 0.0);
    std::vector<std::uint64_t> counts(probs.size(), 0);
    if (total <= 0.0 || probs.empty()) return counts;
    for (std::uint64_t s = 0; s < shots; ++s) {
      double u = next_double() * total;
      double acc = 0.0;
      std::size_t idx = probs.size() - 1;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += (probs[i] > 0.0 ? probs[i] : 0.0);
        if (u < acc) {
          idx = i;
          break;
        }
      }
      ++counts[idx];
    }
    return counts;
  }

 private:
  struct FromState {};
  RngStream(FromState, std::uint64_t raw) : state_(raw) {}

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace qoct
