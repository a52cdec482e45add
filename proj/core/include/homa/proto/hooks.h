#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "homa/fabric/packet.h"
#include "homa/sim/time.h"

namespace homa {

struct CompletionRecord {
  std::uint64_t rpc_id = 0;
  std::int64_t size = 0;
  SimTime submit_time = 0;
  SimTime finish_time = 0;
  std::int64_t retransmitted_bytes = 0;
  bool aborted = false;
  // Accumulated per-packet waits (tail-delay breakdown), meaningful for
  // single-packet messages.
  SimTime preempt_wait = 0;
  SimTime queue_wait = 0;
  std::int32_t data_packets = 0;
};

// Counts inline protocol invariant violations; a handful of samples are kept
// for diagnostics. Zero violations is an acceptance requirement.
class InvariantChecker {
 public:
  void fail(const std::string& what) {
    ++violations_;
    if (samples_.size() < 16) samples_.push_back(what);
  }
  std::uint64_t violations() const { return violations_; }
  const std::vector<std::string>& samples() const { return samples_; }

 private:
  std::uint64_t violations_ = 0;
  std::vector<std::string> samples_;
};

// Sink for completion records and protocol counters; owned by the run.
class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void on_completion(const CompletionRecord& rec) = 0;
  virtual void on_flagged_unsched_bytes(std::int64_t /*bytes*/) {}
  virtual void on_payload_mismatch(std::uint64_t /*rpc_id*/) {}
};

// Receives receiver-side "denied by overcommitment" transitions, paired with
// downlink idle transitions by the wasted-bandwidth monitor.
class DeniedSink {
 public:
  virtual ~DeniedSink() = default;
  virtual void on_denied_change(HostId host, bool any_denied) = 0;
};

// Optional per-packet protocol event trace.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_event(SimTime t, const char* event, HostId host,
                        const Packet& p) = 0;
};

struct TransportHooks {
  MetricsSink* metrics = nullptr;
  InvariantChecker* invariants = nullptr;
  DeniedSink* denied = nullptr;
  TraceSink* trace = nullptr;
};

}  // namespace homa
