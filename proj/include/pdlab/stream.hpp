#pragma once
// Paired, windowed-shuffled training streams.
//
// Both members of a pair regenerate the same underlying example sequence from
// a shared data seed; each member then permutes every window of z*s examples
// with its own shuffle seed. Windows are generated lazily, so memory stays
// O(z*s) no matter how long the stream is. With z = 1 the delivered order is
// the common order itself, so identically initialized members see
// bit-identical batches; intra-batch order effects are the trainer's
// emulation concern, not the stream's.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdlab/datagen.hpp"
#include "pdlab/rng.hpp"

namespace pdlab {

enum class InitMode { identical, distinct };

inline const char* init_mode_name(InitMode m) {
  return m == InitMode::identical ? "identical" : "distinct";
}

struct StreamConfig {
  std::uint64_t total_examples = 1ull << 20;
  int batch_size = 32;
  int window_batches = 1;  // z, a power of two
  std::uint64_t master_seed = 0;

  void validate() const {
    if (total_examples == 0) throw std::invalid_argument("stream.T must be positive");
    if (batch_size <= 0) throw std::invalid_argument("stream.s must be positive");
    if (window_batches <= 0 || (window_batches & (window_batches - 1)) != 0) {
      throw std::invalid_argument("window size z must be a positive power of two");
    }
  }
};

struct PairSeeds {
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed_a = 0;
  std::uint64_t init_seed_b = 0;
  std::uint64_t shuffle_seed_a = 0;
  std::uint64_t shuffle_seed_b = 0;
  std::uint64_t emul_seed_a = 0;
  std::uint64_t emul_seed_b = 0;
};

// Deterministic per-pair seed derivation. Identical-init pairs share the init
// seed; shuffle and emulation seeds always differ between the two members.
inline PairSeeds derive_pair_seeds(std::uint64_t master_seed, std::uint64_t pair_index,
                                   InitMode mode) {
  PairSeeds s;
  s.data_seed = derive_seed(master_seed, StreamTag::train_data, pair_index);
  s.init_seed_a = derive_seed(master_seed, StreamTag::init_a, pair_index);
  s.init_seed_b = mode == InitMode::identical
                      ? s.init_seed_a
                      : derive_seed(master_seed, StreamTag::init_b, pair_index);
  if (mode == InitMode::distinct && s.init_seed_b == s.init_seed_a) {
    s.init_seed_b = mix64(s.init_seed_b);
  }
  s.shuffle_seed_a = derive_seed(master_seed, StreamTag::shuffle_a, pair_index);
  s.shuffle_seed_b = derive_seed(master_seed, StreamTag::shuffle_b, pair_index);
  if (s.shuffle_seed_b == s.shuffle_seed_a) s.shuffle_seed_b = mix64(s.shuffle_seed_b);
  s.emul_seed_a = derive_seed(master_seed, StreamTag::emul_a, pair_index);
  s.emul_seed_b = derive_seed(master_seed, StreamTag::emul_b, pair_index);
  if (s.emul_seed_b == s.emul_seed_a) s.emul_seed_b = mix64(s.emul_seed_b);
  return s;
}

// Uniform permutation of 0..window_len-1 from a stream owned by
// (shuffle_seed, window_index).
inline std::vector<std::uint32_t> permutation_for_window(std::uint64_t shuffle_seed,
                                                         std::uint64_t window_index,
                                                         std::uint32_t window_len) {
  if (window_len < 1) throw std::invalid_argument("window_len must be >= 1");
  std::vector<std::uint32_t> perm(window_len);
  for (std::uint32_t i = 0; i < window_len; ++i) perm[i] = i;
  Rng rng(derive_seed(shuffle_seed, StreamTag::window, window_index));
  shuffle_in_place(perm, rng);
  return perm;
}

class WindowedStream {
 public:
  WindowedStream(const StreamConfig& cfg, std::uint64_t data_seed,
                 std::uint64_t shuffle_seed, const GroundTruth& truth)
      : cfg_(cfg),
        truth_(&truth),
        data_rng_(derive_seed(data_seed, StreamTag::train_data, 0)),
        shuffle_seed_(shuffle_seed),
        remaining_(cfg.total_examples) {
    cfg_.validate();
    window_.reserve(window_capacity());
    scratch_.reserve(window_capacity());
  }

  std::size_t window_capacity() const {
    return std::size_t(cfg_.window_batches) * std::size_t(cfg_.batch_size);
  }

  // Next mini-batch, at most s examples; empty at end of stream.
  std::span<const Example> next_batch() {
    if (cursor_ >= window_.size()) {
      if (!fill_window()) return {};
    }
    const std::size_t n =
        std::min<std::size_t>(cfg_.batch_size, window_.size() - cursor_);
    const std::span<const Example> batch(window_.data() + cursor_, n);
    cursor_ += n;
    return batch;
  }

 private:
  bool fill_window() {
    if (remaining_ == 0) return false;
    const std::size_t n =
        static_cast<std::size_t>(std::min<std::uint64_t>(window_capacity(), remaining_));
    remaining_ -= n;
    window_.resize(n);
    for (auto& e : window_) e = sample_example(*truth_, data_rng_);
    if (cfg_.window_batches > 1) {
      const auto perm = permutation_for_window(shuffle_seed_, window_index_,
                                               static_cast<std::uint32_t>(n));
      scratch_.resize(n);
      for (std::size_t i = 0; i < n; ++i) scratch_[i] = window_[perm[i]];
      window_.swap(scratch_);
    }
    ++window_index_;
    cursor_ = 0;
    return true;
  }

  StreamConfig cfg_;
  const GroundTruth* truth_;
  Rng data_rng_;
  std::uint64_t shuffle_seed_;
  std::uint64_t remaining_;
  std::uint64_t window_index_ = 0;
  std::vector<Example> window_;
  std::vector<Example> scratch_;
  std::size_t cursor_ = 0;
};

}  // namespace pdlab
