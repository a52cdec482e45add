#include <array>
#include <cmath>

#include "doctest.h"
#include "homa/sim/rng.h"

using namespace homa;

TEST_CASE("same seed, same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams differ from each other and the base") {
  const auto s0 = Rng::substream(9, 0);
  const auto s1 = Rng::substream(9, 1);
  const auto t0 = Rng::substream(10, 0);
  CHECK(s0 != s1);
  CHECK(s0 != t0);
}

TEST_CASE("next_below stays in range and covers the range") {
  Rng rng(5);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) counts[rng.next_below(7)]++;
  // 3-sigma binomial band around the uniform expectation.
  const double p = 1.0 / 7;
  const double sigma = std::sqrt(70000 * p * (1 - p));
  for (int c : counts) {
    CHECK(c > 10000 - 3 * sigma);
    CHECK(c < 10000 + 3 * sigma);
  }
}

TEST_CASE("exponential has the requested mean") {
  Rng rng(17);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += rng.exponential(250.0);
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(250.0).epsilon(0.02));
}
