#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rcuage {

/// Seedable random source used by the simulator and the Monte Carlo oracles.
///
/// The generator is xoshiro256** (Blackman & Vigna), period 2^256 - 1. The
/// 256-bit state is filled by SplitMix64 from `seed ^ fnv1a(stream)`, so every
/// (seed, stream) pair names an independent, platform-stable sequence. All
/// derived distributions are built from `uniform()` with fixed algorithms:
///
///   exponential(rate)  inverse transform, -log(1 - U) / rate
///   poisson(mean)      sequential inversion for mean < 30, PTRS
///                      (Hormann 1993, transformed rejection) otherwise
///   gamma(k, rate)     sum of k exponentials
///
/// Instances are single-owner; move them between threads, never share.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::string_view stream);

  RandomSource(const RandomSource&) = delete;
  RandomSource& operator=(const RandomSource&) = delete;
  RandomSource(RandomSource&&) noexcept = default;
  RandomSource& operator=(RandomSource&&) noexcept = default;

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double exponential(double rate);
  std::uint64_t poisson(double mean);
  double gamma_integer(std::uint64_t shape, double rate);

 private:
  std::uint64_t poisson_ptrs(double mean);

  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace rcuage
