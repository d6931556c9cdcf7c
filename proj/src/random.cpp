#include "rcuage/random.hpp"

#include <cmath>

#include "rcuage/core.hpp"

namespace rcuage {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomSource::RandomSource(std::uint64_t seed, std::string_view stream) {
  std::uint64_t s = seed ^ fnv1a64(stream);
  for (auto& word : state_) {
    s = splitmix64(s);
    word = s;
  }
  // splitmix64(0) != 0, so the chained words are never all zero.
}

std::uint64_t RandomSource::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomSource::uniform() {
  // 53 random bits centred in their cell: never exactly 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RandomSource::exponential(double rate) {
  if (!(rate > 0.0)) {
    throw DomainError("exponential: rate must be positive");
  }
  return -std::log1p(-uniform()) / rate;
}

std::uint64_t RandomSource::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson: mean must be finite and non-negative");
  }
  if (mean == 0.0) {
    return 0;
  }
  if (mean >= 30.0) {
    return poisson_ptrs(mean);
  }
  // Inversion: walk the CDF from 0.
  double u = uniform();
  double p = std::exp(-mean);
  std::uint64_t k = 0;
  while (u > p) {
    u -= p;
    ++k;
    p *= mean / static_cast<double>(k);
    if (p <= 0.0) {
      break;  // remaining mass below double resolution
    }
  }
  return k;
}

std::uint64_t RandomSource::poisson_ptrs(double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - std::lgamma(k + 1.0);
    if (lhs <= rhs) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

double RandomSource::gamma_integer(std::uint64_t shape, double rate) {
  if (shape < 1) {
    throw DomainError("gamma_integer: shape must be >= 1");
  }
  double sum = 0.0;
  for (std::uint64_t i = 0; i < shape; ++i) {
    sum += exponential(rate);
  }
  return sum;
}

}  // namespace rcuage
