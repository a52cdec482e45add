#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "homa/fabric/network.h"
#include "homa/prio/size_dist.h"
#include "homa/proto/hooks.h"
#include "homa/sim/time.h"

namespace homa {

// Gathers completion records and protocol-level counters for one run.
class MetricsCollector : public MetricsSink {
 public:
  void on_completion(const CompletionRecord& rec) override {
    records_.push_back(rec);
  }
  void on_flagged_unsched_bytes(std::int64_t bytes) override {
    flagged_unsched_bytes_ += bytes;
  }
  void on_payload_mismatch(std::uint64_t) override { ++payload_mismatches_; }

  const std::vector<CompletionRecord>& records() const { return records_; }
  std::int64_t flagged_unsched_bytes() const { return flagged_unsched_bytes_; }
  std::uint64_t payload_mismatches() const { return payload_mismatches_; }

  std::uint64_t completed() const;
  std::uint64_t aborted() const;

 private:
  std::vector<CompletionRecord> records_;
  std::int64_t flagged_unsched_bytes_ = 0;
  std::uint64_t payload_mismatches_ = 0;
};

// Deterministic nearest-rank percentile: the ceil(p/100 * n)-th smallest.
// Values are copied and sorted; empty input is the caller's error.
double nearest_rank(std::vector<double> values, double percentile);

struct SpectrumBucket {
  std::int64_t lo = 0;  // exclusive
  std::int64_t hi = 0;  // inclusive
  double p50 = 0;
  double p99 = 0;
  std::uint64_t count = 0;
};

struct SlowdownSpectrum {
  std::vector<SpectrumBucket> buckets;
};

// Buckets sit at message-count deciles of the workload CDF; per-bucket
// nearest-rank percentiles of slowdown = (finish - submit) / best_case(size).
// Aborted records are excluded (they are counted separately by the caller).
SlowdownSpectrum slowdown_spectrum(
    const std::vector<CompletionRecord>& records, const SizeDistribution& cdf,
    const std::function<SimTime(std::int64_t)>& best_case);

// Time-weighted fraction of time a receiver's downlink is idle while at
// least one incomplete message is denied grants by the overcommitment limit.
class WasteMonitor : public DeniedSink {
 public:
  WasteMonitor(EventQueue& ev, std::int32_t num_hosts);

  // Wire to Network downlink idle transitions.
  void on_downlink_idle(HostId h, bool idle);
  void on_denied_change(HostId h, bool any_denied) override;

  // Average over receivers of idle-while-denied time / duration.
  double average_fraction(SimTime duration) const;
  double fraction_for(HostId h, SimTime duration) const;

 private:
  struct State {
    bool idle = true;
    bool denied = false;
    SimTime since = 0;   // start of the current idle&&denied interval
    SimTime accum = 0;
  };
  void update(State& s);

  EventQueue& ev_;
  std::vector<State> hosts_;
};

// Fig 12-style decomposition for the smallest messages: how much of the
// extra delay (observed - best case) came from waiting behind a
// lower-priority packet already being transmitted vs. behind equal/higher
// priority traffic. Meaningful for single-packet messages, which is what the
// smallest-20% population is in these workloads.
struct DelayBreakdown {
  std::uint64_t population = 0;
  double observed_p99_ns = 0;
  double best_case_ns = 0;
  double preempt_lag_ns = 0;  // mean over the near-p99 population
  double queueing_ns = 0;
  double residual_ns = 0;
};

DelayBreakdown tail_delay_breakdown(
    const std::vector<CompletionRecord>& records, const SizeDistribution& cdf,
    const std::function<SimTime(std::int64_t)>& best_case);

// ---- CSV emission (fixed column orders) ----

void write_completions_csv(const std::string& path,
                           const std::vector<CompletionRecord>& records);
void write_spectrum_csv(const std::string& path, const SlowdownSpectrum& s);
void write_ports_csv(const std::string& path,
                     const std::vector<Network::PortReport>& ports);
void write_priousage_csv(const std::string& path,
                         const std::array<std::int64_t, kNumPriorities>& bytes,
                         double capacity_bytes);
void write_breakdown_csv(const std::string& path, const DelayBreakdown& b);

// Protocol event trace, one line per packet event.
class FileTrace : public TraceSink {
 public:
  explicit FileTrace(const std::string& path);
  void on_event(SimTime t, const char* event, HostId host,
                const Packet& p) override;

 private:
  std::ofstream out_;
};

}  // namespace homa
