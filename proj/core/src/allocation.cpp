#include "homa/prio/allocation.h"

#include <algorithm>
#include <cmath>

#include "homa/sim/error.h"

namespace homa {

PriorityAllocation allocate_priorities(const SizeDistribution& dist,
                                       std::int64_t unsched_limit,
                                       std::int32_t total_levels) {
  if (dist.empty()) throw ConfigError("allocate_priorities: empty distribution");
  if (total_levels < 2) {
    throw ConfigError("allocate_priorities: need at least 2 levels");
  }
  if (unsched_limit <= 0) {
    throw ConfigError("allocate_priorities: unsched_limit must be positive");
  }

  PriorityAllocation alloc;
  alloc.total_levels = total_levels;
  alloc.unsched_limit = unsched_limit;

  const double total_bytes = dist.mean_size();
  const double unsched_bytes = dist.mean_capped(unsched_limit);
  const double fraction = unsched_bytes / total_bytes;
  const bool has_scheduled = dist.max_size() > unsched_limit;

  if (!has_scheduled) {
    alloc.unsched_levels = total_levels;
  } else {
    const auto rounded =
        static_cast<std::int32_t>(std::lround(fraction * total_levels));
    alloc.unsched_levels = std::clamp(rounded, 1, total_levels - 1);
  }
  alloc.sched_levels = total_levels - alloc.unsched_levels;

  // Cutoffs: inverse query on the unscheduled-byte-weighted CDF at equally
  // spaced quantiles. An atom straddling a quantile goes wholly to the
  // higher-priority level.
  const auto& atoms = dist.atoms();
  double cum = 0;
  std::size_t i = 0;
  for (std::int32_t k = 1; k < alloc.unsched_levels; ++k) {
    const double target = static_cast<double>(k) / alloc.unsched_levels;
    while (i < atoms.size() && cum < target * unsched_bytes - 1e-9) {
      cum += static_cast<double>(std::min(atoms[i].size, unsched_limit)) *
             dist.prob(i);
      ++i;
    }
    const std::size_t at = i > 0 ? i - 1 : 0;
    alloc.cutoffs.push_back(atoms[at].size);
  }
  return alloc;
}

PriorityAllocation allocation_from_cutoffs(std::vector<std::int64_t> cutoffs,
                                           std::int64_t unsched_limit,
                                           std::int32_t total_levels) {
  PriorityAllocation alloc;
  alloc.total_levels = total_levels;
  alloc.unsched_limit = unsched_limit;
  alloc.unsched_levels = static_cast<std::int32_t>(cutoffs.size()) + 1;
  if (alloc.unsched_levels >= total_levels) {
    throw ConfigError("cutoff override: too many cutoffs for the level count");
  }
  if (!std::is_sorted(cutoffs.begin(), cutoffs.end())) {
    throw ConfigError("cutoff override: cutoffs must be ascending");
  }
  alloc.sched_levels = total_levels - alloc.unsched_levels;
  alloc.cutoffs = std::move(cutoffs);
  return alloc;
}

std::int32_t unsched_priority_for(std::int64_t size,
                                  const PriorityAllocation& alloc) {
  // Index of the first cutoff >= size; equal sizes go to the higher level.
  const auto it =
      std::lower_bound(alloc.cutoffs.begin(), alloc.cutoffs.end(), size);
  const auto idx = static_cast<std::int32_t>(it - alloc.cutoffs.begin());
  return alloc.total_levels - 1 - idx;
}

}  // namespace homa
