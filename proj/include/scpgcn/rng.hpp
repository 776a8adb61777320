#pragma once

#include <cstdint>
#include <vector>

namespace scpgcn {

/// Deterministic xoshiro256** generator with hand-rolled distributions.
/// The standard library's distribution objects are implementation-defined,
/// so every draw here is spelled out to keep results reproducible across
/// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via the Marsaglia polar method (second value cached).
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  int uniform_int(int bound);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      T tmp = items[i];
      items[i] = items[j];
      items[j] = tmp;
    }
  }

  /// Mixes a base seed with a stream index into an independent seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_[4];
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace scpgcn
