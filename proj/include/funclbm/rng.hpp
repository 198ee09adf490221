#pragma once

// Counter-free splitmix64 generator with derived substreams.
//
// Every random decision in the library draws from an Rng seeded through
// derive_seed(base, ids...), never from a shared sequential generator. That
// is what makes parallel and serial execution produce identical results for
// the same seed: the stream consumed by one draw site is a pure function of
// (seed, site identifiers), not of scheduling.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace funclbm {

constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

// splitmix64 output mix (Steele, Lea & Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return seed; }

template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id, Ids... rest) {
  return derive_seed(mix64(seed + kGolden64 + mix64(id)), rest...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += kGolden64);
    return mix64(z);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller; consumes two uniforms per draw.
  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Draw from a categorical distribution given normalized probabilities.
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_int(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace funclbm
