#include "truvar/rng.hpp"

#include <cmath>
#include <numbers>

#include "truvar/common.hpp"

namespace truvar {
namespace {

// splitmix64 finalizer; full-period mixing of a 64-bit counter.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash_name(std::string_view name) {
  // FNV-1a, then one mixing round to spread short names.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix(h);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::string_view stream_name)
    : key_(mix(mix(seed) ^ hash_name(stream_name))) {}

std::uint64_t RandomStream::bits() { return mix(key_ ^ mix(counter_++)); }

double RandomStream::uniform() {
  // 53 mantissa bits, shifted off zero so log(u) below stays finite.
  return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n == 0) throw ConfigError("RandomStream::below: n must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t v = bits();
    if (v < limit) return v % n;
  }
}

}  // namespace truvar
