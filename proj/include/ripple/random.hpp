#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace ripple {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seeded generator with a platform-independent output sequence. The standard
// distributions are implementation-defined, so every draw goes through the
// raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

  // Independent stream derived from (seed, stream).
  static Rng stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Index drawn proportionally to non-negative weights. `total` must equal
// the sum of `weights` and be positive.
std::size_t sample_weighted(std::span<const double> weights, double total, Rng& rng);

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ripple
