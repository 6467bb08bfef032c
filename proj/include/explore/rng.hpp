#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace explore {

// All randomness in a run flows from one top-level seed through named
// sub-streams (world, diversion, outcomes, ...). Seeds are derived with
// splitmix64 so sub-streams are independent and stable across platforms.

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Child seed for the sub-stream `label` (optionally indexed by a and b).
constexpr uint64_t derive_seed(uint64_t base, std::string_view label,
                               uint64_t a = 0, uint64_t b = 0) {
  uint64_t h = splitmix64(base ^ fnv1a64(label));
  h = splitmix64(h ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b));
  return h;
}

// Maps a 64-bit word to [0, 1) using the top 53 bits.
constexpr double to_unit01(uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Stateless hash draw in [0, 1); used for arm diversion and for outcome
// sampling, where the draw must not depend on request processing order.
constexpr double unit_hash(uint64_t seed, uint64_t value) {
  return to_unit01(splitmix64(seed ^ splitmix64(value)));
}

// mt19937_64 with fixed-layout draws. The standard guarantees engine output
// across implementations; the standard distributions it does not, so the few
// samplers we need are spelled out here and simulations replay bit-identically.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform01() { return to_unit01(engine_()); }

  // (0, 1]; keeps log() finite in Box-Muller
  double uniform01_open_low() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, one value per call so the stream layout stays fixed.
  double normal(double mean = 0.0, double stddev = 1.0) {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n); n > 0. Modulo bias is irrelevant at the
  // population sizes simulated here.
  uint64_t below(uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace explore
