#pragma once

#include <cstdint>
#include <random>

namespace mccr {

/// Identifies one reproducible random stream. Identical (seed, stream) pairs
/// produce bit-identical variate sequences.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Deterministically derived sub-stream, e.g. one per restart or trial.
  RngState child(std::uint64_t index) const;

  bool operator==(const RngState&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit Mersenne Twister keyed by a mixed (seed, stream) pair.
///
/// Variates use fixed transformations of the raw 64-bit output so that
/// streams do not depend on the standard library's distribution classes:
///   uniform()      = ((bits >> 11) + 0.5) * 2^-53, strictly inside (0, 1)
///   exponential()  = -log(uniform())
class Rng {
 public:
  explicit Rng(const RngState& state);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mccr
