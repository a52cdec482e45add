#pragma once

#include <cstdint>
#include <random>

namespace homa {

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// the standard); the distributions are implemented here by inverse transform
// so that results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1. Debiased by rejection.
  std::uint64_t next_below(std::uint64_t n);

  // Exponential with the given mean (> 0).
  double exponential(double mean);

  // Derives an independent substream seed from (seed, stream id). Used to
  // decouple e.g. workload sampling from fabric spraying so that changing
  // one consumer does not perturb the other.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace homa
