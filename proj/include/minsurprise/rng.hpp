#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace minsurprise {

/// splitmix64 output finalizer.
constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Avalanche mixer over a sequence of 64-bit counters.
///
///   h = 0x6A09E667F3BCC909
///   for each word w:  h = fin(h ^ fin(w + 0x9E3779B97F4A7C15))
///
/// where fin is splitmix64_finalize. These constants are part of the seed
/// record format; changing them changes every derived seed.
constexpr std::uint64_t mix64(std::span<const std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t w : words) {
    h = splitmix64_finalize(h ^ splitmix64_finalize(w + 0x9E3779B97F4A7C15ULL));
  }
  return h;
}

constexpr std::uint64_t mix64(std::initializer_list<std::uint64_t> words) noexcept {
  return mix64(std::span<const std::uint64_t>(words.begin(), words.size()));
}

/// Platform-stable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distribution helpers are implemented here because the
/// standard library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n) by multiply-shift with rejection (Lemire).
  /// n must be positive.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
};

}  // namespace minsurprise
