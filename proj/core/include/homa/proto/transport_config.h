#pragma once

#include <cstdint>

#include "homa/sim/time.h"

namespace homa {

// Protocol knobs. Defaults correspond to the paper setup on the default
// topology; rtt_bytes is resolved from the topology when left at 0.
struct TransportConfig {
  // Grant window and default unscheduled limit (~9.7 KB at 10 Gbps defaults).
  std::int64_t rtt_bytes = 0;

  // Levels the protocol reasons about (allocation, grants, overcommitment).
  std::int32_t total_levels = 8;
  // Levels actually stamped on the wire. Restricting this collapses adjacent
  // logical levels, which is how the priority-count ablations work: the
  // grant machinery is unchanged, only the switches see fewer levels.
  std::int32_t wire_levels = 8;

  // Maximum messages granted concurrently per receiver. 0 means "one per
  // scheduled priority level", the protocol default.
  std::int32_t overcommit_degree = 0;
  bool overcommit_unlimited = false;

  SimTime resend_timeout = 2 * kMillisecond;
  std::int32_t max_resend_retries = 5;

  // Incast control: requests issued while more than incast_threshold RPCs
  // are outstanding carry a flag that lowers the unscheduled limit of the
  // response.
  std::int32_t incast_threshold = 8;
  std::int32_t incast_unsched_limit = 480;

  // NIC transmit-queue cap, in full-size packets of untransmitted bytes.
  std::int32_t nic_queue_packets = 2;

  // Unscheduled-limit override (configuration study); -1 uses rtt_bytes.
  // 0 makes every byte scheduled: senders then announce a new message with
  // an empty DATA packet so the receiver can start granting.
  std::int64_t unsched_limit = -1;

  // Online priority estimation. Off by default: cutoffs are precomputed
  // from the configured workload distribution.
  bool online_estimation = false;
  SimTime estimator_interval = 10 * kMillisecond;
  // Extra wire bytes charged to a packet carrying a cutoff update (0 models
  // piggybacking as free).
  std::int32_t piggyback_wire_bytes = 0;

  // Materialize payload bytes and verify them on reassembly.
  bool verify_payload = false;

  // Run the inline protocol invariant checks (grant window, overcommitment
  // bound, distinct/lowest scheduled levels).
  bool check_invariants = true;

  // Forces every grant to carry this scheduled level instead of the dynamic
  // lowest-level assignment (preemption-lag study). -1 = dynamic.
  std::int32_t forced_sched_level = -1;

  // How long a sender keeps state for a fully transmitted one-way message so
  // it can still serve RESENDs. 0 derives it from the resend settings.
  SimTime oneway_state_linger = 0;

  std::int32_t effective_overcommit(std::int32_t sched_levels) const {
    if (overcommit_unlimited) return INT32_MAX;
    if (overcommit_degree > 0) return overcommit_degree;
    return sched_levels > 0 ? sched_levels : 1;
  }

  std::int32_t wire_priority_of(std::int32_t logical) const {
    if (wire_levels >= total_levels) return logical;
    return logical * wire_levels / total_levels;
  }

  SimTime oneway_linger() const {
    return oneway_state_linger > 0
               ? oneway_state_linger
               : resend_timeout * (max_resend_retries + 2);
  }
};

}  // namespace homa
