#pragma once

// Deterministic random streams for the simulators.  Outputs are a pure
// function of (seed, counter), so any simulation unit can be given its own
// stream derived from integer coordinates and trials can run in any order --
// or on any number of threads -- with bitwise-identical results.  The exact
// output sequence is part of the reproducibility contract: it is pinned by
// the test-vector values in the unit tests, not by the name of the mixing
// function.

#include <cstdint>
#include <limits>

namespace isac {

namespace detail {

inline constexpr std::uint64_t kStreamIncrement = 0x9E3779B97F4A7C15ULL;

/// 64-bit avalanche mixer: two xor-shift-multiply rounds and a final fold.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// ============================================================================
// CounterRng
// ============================================================================

/// Counter generator: output i is mix64(seed + (i+1)*increment).  No warm-up,
/// O(1) construction, and it satisfies UniformRandomBitGenerator, so the
/// standard <random> distributions can draw from it directly.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += detail::kStreamIncrement;
    return detail::mix64(state_);
  }

  /// Uniform double on [0,1) with the full 53 bits of mantissa.
  double uniform() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Independent stream for one simulation unit, keyed by the run seed and
/// three integer coordinates (by convention: blocklength or domain tag,
/// state or symbol index, trial index).  Every field passes through the
/// mixer, so neighboring coordinates produce unrelated streams.
[[nodiscard]] constexpr CounterRng trial_stream(std::uint64_t seed, std::uint64_t a,
                                               std::uint64_t b, std::uint64_t c) {
  std::uint64_t k = detail::mix64(seed + detail::kStreamIncrement);
  k = detail::mix64(k ^ (a + detail::kStreamIncrement));
  k = detail::mix64(k ^ (b + detail::kStreamIncrement));
  k = detail::mix64(k ^ (c + detail::kStreamIncrement));
  return CounterRng(k);
}

}  // namespace isac
