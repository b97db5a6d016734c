#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "splitplot/normal.hpp"

namespace splitplot {

// Counter-based pseudo-random stream (SplitMix64 output function).
// The mapping (seed, draw index) -> output is fixed and platform independent;
// serialized results and test goldens rely on it.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform draw in the open interval (0, 1), 53-bit resolution.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Unbiased uniform draw in [0, n). Rejection keeps the stream exact.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) {
      throw std::invalid_argument("SeedStream::below: n must be positive");
    }
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t u = next_u64();
      if (u >= threshold) return u % n;
    }
  }

  /// Standard normal via inverse-CDF transform of next_double().
  double normal() { return normal_quantile(next_double()); }

  /// Moves a uniformly chosen k-subset of v into v[0..k). Partial Fisher-Yates.
  template <typename T>
  void partial_shuffle(std::vector<T>& v, std::size_t k) {
    const std::size_t n = v.size();
    if (k > n) k = n;
    for (std::size_t i = 0; i + 1 < n && i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    partial_shuffle(v, v.size());
  }

  /// Derives an independent child seed from (seed, tags...). Used to key
  /// per-column, per-cell, and per-replicate streams off one master seed.
  template <typename Iterator>
  static std::uint64_t derive_range(std::uint64_t seed, Iterator first,
                                    Iterator last) {
    std::uint64_t h = mix(seed + 0x9E3779B97F4A7C15ULL);
    for (; first != last; ++first) {
      h = mix(h ^ mix(*first + 0x9E3779B97F4A7C15ULL));
    }
    return h;
  }

  static std::uint64_t derive(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> tags) {
    return derive_range(seed, tags.begin(), tags.end());
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace splitplot
