#pragma once

#include <cstdint>

namespace homa {

// Simulated time in integer nanoseconds. All delays and rates in the
// simulator round to whole nanoseconds so repeated sums stay exact.
using SimTime = std::int64_t;

inline constexpr SimTime kNanosecond = 1;
inline constexpr SimTime kMicrosecond = 1000;
inline constexpr SimTime kMillisecond = 1000 * 1000;
inline constexpr SimTime kSecond = 1000 * 1000 * 1000;

}  // namespace homa
