#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace mimic {

/// Stage constants XOR-ed into the run seed so every consumer of randomness
/// draws from its own stream.
namespace stage {
inline constexpr std::uint64_t split = 0x53504c4954000001ULL;
inline constexpr std::uint64_t folds = 0x464f4c4453000002ULL;
inline constexpr std::uint64_t teacher = 0x5445414348000003ULL;
inline constexpr std::uint64_t student = 0x53545544454e0004ULL;
inline constexpr std::uint64_t svm_shuffle = 0x53564d5348000005ULL;
inline constexpr std::uint64_t forest = 0x464f524553000006ULL;
inline constexpr std::uint64_t synthetic = 0x53594e5448000007ULL;
}  // namespace stage

/// SplitMix64 finalizer. Used to turn (seed, index) pairs into
/// well-separated sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage_constant) {
  return seed ^ stage_constant;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage_constant,
                                    std::uint64_t index) {
  return splitmix64((seed ^ stage_constant) + splitmix64(index));
}

/// Seedable generator with output that does not depend on the standard
/// library vendor: the engine is mt19937_64 (fully specified by the
/// standard) and all derived distributions are implemented here rather than
/// through <random>'s implementation-defined distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = engine_();
    while (x >= limit) {
      x = engine_();
    }
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mimic
