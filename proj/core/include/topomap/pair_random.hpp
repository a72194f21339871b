#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace topomap {

/// Stable 64-bit FNV-1a of a string. Used instead of std::hash so that
/// seeded oracle noise is identical across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed derived from (seed, {a, b}); independent of argument order.
constexpr std::uint64_t unordered_pair_seed(std::uint64_t seed, std::string_view a, std::string_view b) {
  std::uint64_t ha = fnv1a64(a);
  std::uint64_t hb = fnv1a64(b);
  if (hb < ha || (hb == ha && b < a)) {
    const std::uint64_t t = ha;
    ha = hb;
    hb = t;
  }
  return splitmix64(splitmix64(seed ^ 0x5bd1e9955bd1e995ull) ^ splitmix64(ha) ^ (splitmix64(hb) * 3));
}

/// Small deterministic generator (splitmix64 stream) with portable
/// uniform and normal draws.
class PairRng {
 public:
  explicit constexpr PairRng(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return splitmix64(state_);
  }

  /// Uniform in [0, 1).
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi].
  constexpr std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    return span == 0 ? next() : lo + next() % span;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace topomap
