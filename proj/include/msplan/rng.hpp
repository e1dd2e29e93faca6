#pragma once

#include <cstdint>

namespace msplan {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// Stateless counter-based generator. A draw is a pure function of
/// (key, stream, counter), so the order in which draws are requested never
/// changes their values.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t key, std::uint64_t stream) noexcept
      : base_(hash_combine(mix64(key), stream)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(base_ ^ mix64(counter));
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t counter, double lo, double hi) const noexcept {
    return lo + (hi - lo) * uniform(counter);
  }

 private:
  std::uint64_t base_;
};

}  // namespace msplan
