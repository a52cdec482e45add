#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "homa/fabric/network.h"
#include "homa/prio/allocation.h"
#include "homa/run/run_config.h"
#include "homa/stats/metrics.h"

namespace homa {

struct RunResult {
  SimTime duration = 0;
  std::uint64_t events = 0;
  bool truncated = false;

  std::vector<CompletionRecord> completions;
  std::uint64_t completed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t payload_mismatches = 0;
  std::int64_t flagged_unsched_bytes = 0;

  std::vector<Network::PortReport> ports;
  PortStats tor_up_agg, aggr_down_agg, tor_down_agg;
  FabricCounters fabric;

  double waste_avg = 0;
  std::vector<double> waste_per_host;

  std::array<std::int64_t, kNumPriorities> prio_bytes{};
  double downlink_capacity_bytes = 0;

  std::uint64_t invariant_violations = 0;
  std::vector<std::string> violation_samples;

  // Load-tracking window (second half of the run).
  double offered_goodput_2nd = 0;
  double delivered_goodput_2nd = 0;
  // Median DATA-packet network wait in the 3rd and 4th quarters.
  double median_wait_q3 = -1;
  double median_wait_q4 = -1;

  std::uint64_t messages_submitted = 0;
  std::int64_t resolved_rtt_bytes = 0;
  std::vector<std::int64_t> resolved_cutoffs;
  PriorityAllocation allocation;

  SlowdownSpectrum spectrum;
  DelayBreakdown breakdown;

  // Detector used by the max-load search: goodput tracks offered within 2%
  // and the median queueing delay is stationary over the second half.
  bool sustainable() const;
};

// Runs one fully-specified configuration (no sweep) with one seed.
RunResult run_simulation(const RunConfig& cfg, std::uint64_t seed);

// Writes the standard CSVs plus the resolved-config echo into dir.
void write_outputs(const std::string& dir, const RunConfig& cfg,
                   std::uint64_t seed, const RunResult& result);

}  // namespace homa
