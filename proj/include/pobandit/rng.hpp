#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace pobandit {

// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
// (counter, key); used as the core of RandomStream.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer; used to fold tuples into keys.
std::uint64_t mix64(std::uint64_t x);

// Folds a path of integers into a 64-bit key. Distinct paths give
// (with overwhelming probability) distinct keys.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Counter-based random stream. The output sequence is a pure function of
/// (key, position), so streams can be split by deriving new keys without
/// any shared state between them.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key = 0) : key_(key) {}

  std::uint64_t key() const { return key_; }

  /// Independent stream keyed by (this key, path...).
  RandomStream substream(std::initializer_list<std::uint64_t> path) const {
    return RandomStream(derive_seed(key_, path));
  }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Standard normal via Box-Muller.
  double normal();
  void fill_normal(std::span<double> out);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_used_ = 4;  // in 32-bit words
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pobandit
