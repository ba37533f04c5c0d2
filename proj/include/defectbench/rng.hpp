#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "defectbench/error.hpp"

namespace defectbench {

// Deterministic 64-bit generator (splitmix64: additive Weyl sequence plus
// two xor-shift/multiply finalizer rounds). Same seed, same stream. Every
// stochastic procedure in this library draws from an injected RandomSource;
// nothing reads ambient entropy.
class RandomSource {
public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed_used() const { return seed_; }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw InvalidInput("next_below: n must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 0;
};

// n i.i.d. draws from [0, n), i.e. one bootstrap resample.
inline std::vector<std::size_t> bootstrap_indices(std::size_t n, RandomSource& rng) {
  if (n == 0) throw InvalidInput("bootstrap_indices: empty population");
  std::vector<std::size_t> out(n);
  for (auto& v : out) v = static_cast<std::size_t>(rng.next_below(n));
  return out;
}

// FNV-1a over bytes; also used as the cheap content checksum for
// reproducibility comparisons.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Stable per-role substream seed: base seed offset by an FNV-1a hash of the
// role tag, so independent consumers never share a stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view role) {
  return base + fnv1a64(role);
}

}  // namespace defectbench
