#pragma once

#include <cstdint>
#include <map>

#include "homa/prio/allocation.h"
#include "homa/prio/size_dist.h"

namespace homa {

// Per-receiver empirical message-size histogram. In online mode a receiver
// records every incoming message length, periodically recomputes its
// priority allocation from the observed distribution, and piggybacks the new
// cutoffs on outgoing packets; senders keep using the last cutoffs they saw.
class WorkloadEstimator {
 public:
  WorkloadEstimator(PriorityAllocation fallback, std::int64_t unsched_limit,
                    std::int32_t total_levels)
      : fallback_(std::move(fallback)),
        unsched_limit_(unsched_limit),
        total_levels_(total_levels) {}

  void observe(std::int64_t size) {
    ++counts_[size];
    ++num_observed_;
  }

  std::uint64_t observations() const { return num_observed_; }

  // Distribution of everything observed so far. Requires observations() > 0.
  SizeDistribution empirical() const;

  // Recomputes the allocation; with no observations falls back to the
  // configured static allocation.
  const PriorityAllocation& recompute();

  const PriorityAllocation& current() const { return current_; }
  std::uint32_t version() const { return version_; }

 private:
  PriorityAllocation fallback_;
  std::int64_t unsched_limit_;
  std::int32_t total_levels_;
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t num_observed_ = 0;
  PriorityAllocation current_ = fallback_;
  std::uint32_t version_ = 0;
};

}  // namespace homa
