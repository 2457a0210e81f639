#pragma once

#include <cstdint>
#include <string_view>

namespace truvar {

// Counter-based generator: every draw is a pure function of (seed, stream name,
// counter), so traces replay bit-for-bit regardless of platform or call order
// elsewhere. Distinct stream names (observations, anchors, start point, ...)
// never collide for the same seed.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view stream_name);

  // Raw 64 random bits; advances the counter.
  std::uint64_t bits();

  // Uniform in (0, 1), endpoints excluded.
  double uniform();

  // Standard normal via Box-Muller on two uniforms.
  double normal();

  // Uniform integer in [0, n); n must be positive. Unbiased by rejection.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace truvar
