#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace entest {

//! Finalizer of the SplitMix64 generator (Steele, Lea & Flood 2014).
//! A bijective 64-bit mixer used both to advance streams and to derive keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Derives a child key from a parent key and a counter.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t counter) noexcept
{
  return mix64(parent ^ (mix64(counter + 0x9e3779b97f4a7c15ULL) + 0x632be59bd9b4e019ULL));
}

template<typename... Rest>
constexpr std::uint64_t derive_key(std::uint64_t parent,
                                   std::uint64_t counter,
                                   Rest... rest) noexcept
{
  return derive_key(derive_key(parent, counter), static_cast<std::uint64_t>(rest)...);
}

//! SplitMix64 stream. Satisfies UniformRandomBitGenerator.
//!
//! Streams are keyed, never shared: every (seed, n, trial, point) tuple gets
//! its own generator through derive_key, so output does not depend on the
//! order in which points or trials are produced.
//!
//! Variates are drawn with fixed formulas (53-bit mantissa uniforms,
//! Box-Muller normals) rather than <random> distributions, whose algorithms
//! differ between standard library implementations.
class SplitMix64
{
public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept
    : state_(seed)
  {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept
  {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept
  {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  //! Uniform on [0, 1).
  double uniform() noexcept
  {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  //! Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept
  {
    return lo + (hi - lo) * uniform();
  }

  //! Standard normal via Box-Muller; the second variate is discarded so that
  //! each call consumes exactly two words.
  double normal() noexcept
  {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t state_;
};

} // namespace entest
