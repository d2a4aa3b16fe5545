#pragma once

#include <cstdint>

namespace ssan {

/// Deterministic pseudo-random generator: xoshiro256** seeded through
/// splitmix64. Every consumer draws from its own named stream so that
/// changing how one consumer uses randomness never shifts the sequences
/// seen by the others. All floating-point mappings are implemented here
/// (not via std:: distributions) so sequences are identical everywhere.
class Rng {
public:
  enum class Stream : std::uint64_t {
    Init = 1,   // model weight initialization
    Split = 2,  // labeled/unlabeled target split
    Synth = 3,  // synthetic task generation
  };

  Rng(std::uint64_t seed, Stream stream);

  /// Next raw 64-bit word.
  std::uint64_t next();

  /// Uniform double in [0, 1), 53 mantissa bits.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (consumes two uniforms per call).
  double gaussian();

  /// Uniform integer in [0, n); n must be > 0. Unbiased via rejection.
  std::uint64_t below(std::uint64_t n);

private:
  std::uint64_t state_[4];
};

}  // namespace ssan
