#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace hyperhier {

// Counter-based generator. Word i of the stream identified by (seed, stream)
// is mix64(key + i * 2^64/phi) with key derived from both ids, so every
// consumer of randomness owns an independent stream that can be regenerated
// from scratch — no shared-state ordering between modules, and results are
// reproducible for a given seed no matter which code paths ran before.
class CounterRng {
 public:
  static CounterRng keyed(std::uint64_t seed, std::uint64_t stream) {
    CounterRng r;
    r.key_ = mix64(mix64(seed + 0x9e3779b97f4a7c15ull) ^ mix64(stream + 0x6a09e667f3bcc909ull));
    return r;
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // standard normal via Box-Muller; caches the second deviate
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // uniform integer in [0, bound); bound > 0
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * bound) >> 64);
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream ids used across the library. Keep stable: saved models, generated
// datasets and report files all depend on them.
namespace streams {
inline constexpr std::uint64_t model_init = 1;
inline constexpr std::uint64_t synthetic_means = 2;
inline constexpr std::uint64_t synthetic_train = 3;
inline constexpr std::uint64_t synthetic_test = 4;
inline constexpr std::uint64_t tree_shuffle = 5;
inline constexpr std::uint64_t epoch_base = 1ull << 32;        // + epoch index
inline constexpr std::uint64_t pair_sample_base = 1ull << 33;  // + anchor * classes + other
}  // namespace streams

// Fisher-Yates permutation of 0..n-1
inline std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace hyperhier
