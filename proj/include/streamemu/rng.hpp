#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace streamemu {

/// Deterministic random stream. Trials derive independent sub-streams from
/// (root seed, trial index), so results do not depend on execution order.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static Rng forTrial(std::uint64_t rootSeed, std::uint64_t trialIndex);

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return engine_(); }

  /// Uniform on [0,1) with 53 bits of resolution.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace streamemu
