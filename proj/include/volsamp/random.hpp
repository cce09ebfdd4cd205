#pragma once

#include <cstdint>
#include <limits>

namespace volsamp {

namespace detail {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Counter-based SplitMix64: output i is mix64(key + (i + 1) * gamma), so any
 * position of any stream can be computed without replaying earlier draws.
 *
 * Substreams are derived from (seed, stream index) by hashing, which keeps
 * draw t of a batch reproducible regardless of the order draws are made in.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(derive_key(seed, stream)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), unbiased by rejecting the short top range.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t x = (*this)();
      if (x >= threshold) return x % bound;
    }
  }

  std::uint64_t position() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return detail::mix64(seed ^ detail::mix64(stream * detail::kGoldenGamma + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace volsamp
