#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace mbti {

/// Seedable generator with a fully specified algorithm so samples can be
/// reproduced from other languages: std::mt19937_64 seeded with the 64-bit
/// seed, bounded integers by rejection on the raw 64-bit output, doubles from
/// the top 53 bits. No std::*_distribution is used (their output is
/// implementation-defined).
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/rejection-uniform/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Fisher-Yates, from the back.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mbti
