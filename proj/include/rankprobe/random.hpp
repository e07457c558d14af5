#pragma once

#include <cstdint>
#include <random>

namespace rankprobe {

/// Counter-based seed derivation (splitmix64 finalizer over seed and index).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// Seeded, copyable random stream. Copies evolve independently; split()
/// yields children that depend only on (seed, index), never on how much of
/// the parent has been consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  RandomStream split(std::uint64_t index) const { return RandomStream(derive_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace rankprobe
