#pragma once
// Deterministic seed-derived random streams. Every randomness consumer owns an
// explicit stream derived from (root seed, purpose tag, index), so no result
// depends on what other components drew before it.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace pdlab {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

enum class StreamTag : std::uint64_t {
  truth = 1,        // ground-truth model parameters
  train_data = 2,   // common training sequence of a pair
  eval_data = 3,    // evaluation set of a pair
  init_a = 4,       // parameter initialization, pair member A
  init_b = 5,       // parameter initialization, pair member B
  shuffle_a = 6,    // window shuffling, pair member A
  shuffle_b = 7,    // window shuffling, pair member B
  emul_a = 8,       // intra-batch accumulation order, pair member A
  emul_b = 9,       // intra-batch accumulation order, pair member B
  window = 10,      // per-window permutation stream
  batch_order = 11, // per-batch accumulation-order stream
  teacher = 12,     // warm-start teacher (init and data)
};

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = mix64(root + kGolden);
  h = mix64(h ^ (tag * 0xD6E8FEB86659FD93ull));
  h = mix64(h + index * kGolden);
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t root, StreamTag tag,
                                    std::uint64_t index) noexcept {
  return derive_seed(root, static_cast<std::uint64_t>(tag), index);
}

// Counter-based generator: the n-th output is mix64(seed + n * kGolden), so a
// stream is fully determined by its seed and regenerable from any point.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  // 53-bit uniform in [0, 1).
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Box-Muller, cosine branch only; draw order is two uniforms per call.
  double normal(double mu, double sd) noexcept {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return mu + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Unbiased integer in [0, n) via masked rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t r = next_u64() & mask;
      if (r < n) return r;
    }
  }

 private:
  std::uint64_t state_;
};

// Fisher-Yates, high-to-low.
template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace pdlab
