#include "homa/sim/rng.h"

#include <cmath>

namespace homa {

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Reject the final partial block so every value is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::exponential(double mean) {
  // next_double() < 1, so the log argument is in (0, 1].
  return -mean * std::log(1.0 - next_double());
}

std::uint64_t Rng::substream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace homa
