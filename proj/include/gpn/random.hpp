#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace gpn {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen for its trivially portable
// definition: every stream below is reproducible from a 64-bit seed in any
// language.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

 private:
  std::uint64_t state_;
};

// Derived streams: uniform doubles from the top 53 bits, unbiased bounded
// integers by rejection, normals by Box-Muller (one value per call).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_.next(); }
  // [0, 1)
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n)
  std::size_t uniform_index(std::size_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates, iterating from the back.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  SplitMix64 gen_;
};

// Seed for an independent sub-stream keyed by (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gpn
