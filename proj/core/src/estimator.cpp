#include "homa/prio/estimator.h"

namespace homa {

SizeDistribution WorkloadEstimator::empirical() const {
  std::vector<SizeDistribution::Atom> atoms;
  atoms.reserve(counts_.size());
  std::uint64_t cum = 0;
  for (const auto& [size, count] : counts_) {
    cum += count;
    atoms.push_back(SizeDistribution::Atom{
        size, static_cast<double>(cum) / static_cast<double>(num_observed_)});
  }
  if (!atoms.empty()) atoms.back().cum = 1.0;
  return SizeDistribution(std::move(atoms));
}

const PriorityAllocation& WorkloadEstimator::recompute() {
  if (num_observed_ == 0) {
    current_ = fallback_;
    return current_;
  }
  current_ = allocate_priorities(empirical(), unsched_limit_, total_levels_);
  ++version_;
  return current_;
}

}  // namespace homa
