#pragma once

#include <cstdint>
#include <vector>

#include "homa/prio/size_dist.h"

namespace homa {

// How the 8 (or fewer) priority levels split between unscheduled and
// scheduled traffic, plus the size cutoffs that map message sizes to
// unscheduled levels. Levels number 0..total_levels-1 with higher = more
// urgent; scheduled traffic owns the low levels 0..sched_levels-1 and
// unscheduled traffic the rest.
struct PriorityAllocation {
  std::int32_t total_levels = 8;
  std::int32_t unsched_levels = 0;
  std::int32_t sched_levels = 0;
  // Ascending size thresholds, unsched_levels-1 entries. Sizes <= cutoffs[0]
  // take the top level; sizes in (cutoffs[i-1], cutoffs[i]] the next one
  // down; a size equal to a cutoff goes to the higher-priority side. When
  // the distribution has too few distinct sizes the thresholds can repeat,
  // which simply leaves intermediate levels unused.
  std::vector<std::int64_t> cutoffs;
  std::int64_t unsched_limit = 0;

  std::int32_t lowest_unsched_level() const { return sched_levels; }
};

// Splits levels so each kind of traffic gets a share of the levels
// proportional to its share of the bytes, then places the unscheduled
// cutoffs so each unscheduled level carries an equal share of the
// unscheduled byte mass (shorter sizes on higher levels).
//
// unsched_levels = clamp(round(F * total_levels), 1, total_levels - 1) when
// any message exceeds unsched_limit, else total_levels, where F is the
// fraction of all bytes that arrive unscheduled.
PriorityAllocation allocate_priorities(const SizeDistribution& dist,
                                       std::int64_t unsched_limit,
                                       std::int32_t total_levels);

// Builds an allocation from explicit cutoffs (manual override). The number
// of unscheduled levels is cutoffs.size() + 1.
PriorityAllocation allocation_from_cutoffs(std::vector<std::int64_t> cutoffs,
                                           std::int64_t unsched_limit,
                                           std::int32_t total_levels);

// Unscheduled level for a message of the given total size.
std::int32_t unsched_priority_for(std::int64_t size,
                                  const PriorityAllocation& alloc);

}  // namespace homa
