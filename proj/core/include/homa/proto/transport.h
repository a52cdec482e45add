#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <vector>

#include "homa/fabric/network.h"
#include "homa/fabric/packet.h"
#include "homa/prio/allocation.h"
#include "homa/prio/estimator.h"
#include "homa/proto/hooks.h"
#include "homa/proto/transport_config.h"
#include "homa/sim/event_queue.h"

namespace homa {

// Deterministic payload content for verification mode.
std::uint8_t payload_byte(std::uint64_t rpc_id, std::int64_t index);

// Per-host Homa transport: SRPT sender with NIC queue limiting, and the
// receiver-side grant clock with overcommitment, dynamic scheduled
// priorities, incast control and timeout recovery. Pure state machine plus
// packets: all I/O goes through the Network.
class HostTransport {
 public:
  HostTransport(HostId id, EventQueue& ev, Network& net,
                const TransportConfig& cfg, const PriorityAllocation& alloc,
                TransportHooks hooks);

  // One-way message; the receiver records the completion.
  std::uint64_t submit_oneway(HostId dst, std::int64_t bytes);

  // Echo-style RPC: the server responds with response_bytes as soon as the
  // request completes; the completion record is written at this client.
  std::uint64_t issue_rpc(HostId server, std::int64_t request_bytes,
                          std::int64_t response_bytes);

  std::int32_t outstanding_rpcs() const { return outstanding_rpcs_; }

  // Counters for tests and reports.
  struct Counters {
    std::uint64_t grants_sent = 0;
    std::uint64_t resends_sent = 0;
    std::uint64_t busies_sent = 0;
    std::uint64_t data_packets_sent = 0;
    std::int64_t retransmitted_bytes = 0;
    std::uint64_t completions = 0;
    std::uint64_t aborts = 0;
  };
  const Counters& counters() const { return counters_; }

  // Number of incomplete inbound messages currently denied grants by the
  // overcommitment limit.
  std::int32_t denied_count() const { return denied_count_; }

  // Test hook (at-least-once path): drop all server-side state for an RPC as
  // if the last response packet had been transmitted long ago.
  void debug_discard_server_rpc(std::uint64_t rpc_id);

  // Stops periodic internal events (online estimation) past this time so
  // drain phases terminate.
  void set_horizon(SimTime horizon) { horizon_ = horizon; }

 private:
  struct SenderMsg {
    std::uint64_t rpc_id = 0;
    HostId dst = -1;
    MsgDir dir = MsgDir::Request;
    std::int64_t length = 0;
    std::int64_t next_offset = 0;
    std::int64_t granted = 0;
    std::int32_t unsched_bytes = 0;
    std::int32_t unsched_prio = 0;  // logical
    std::int32_t sched_prio = 0;    // logical, from the latest GRANT
    std::uint64_t submit_seq = 0;
    SimTime submitted_at = 0;
    bool incast_flag = false;
    bool announce_pending = false;  // zero-unscheduled-limit announcement
    std::int64_t response_length = kNoResponse;  // requests: echo size
    std::deque<std::pair<std::int64_t, std::int64_t>> retx_ranges;
    EventHandle gc_timer;  // one-way state linger

    std::int64_t remaining() const { return length - next_offset; }
    bool transmittable() const {
      return announce_pending || !retx_ranges.empty() || next_offset < granted;
    }
  };

  struct ReceiverMsg {
    std::uint64_t rpc_id = 0;
    HostId src = -1;
    MsgDir dir = MsgDir::Request;
    std::int64_t length = 0;
    std::int32_t unsched_bytes = 0;
    std::map<std::int64_t, std::int64_t> ranges;  // start -> end, disjoint
    std::int64_t bytes_received = 0;
    std::int64_t granted = 0;
    bool active = false;
    std::int32_t level = 0;  // logical scheduled level while active
    std::uint64_t arrival_seq = 0;
    std::int32_t retries = 0;
    EventHandle timer;
    std::int64_t retx_bytes = 0;
    SimTime submitted_at = 0;
    SimTime preempt_wait = 0;
    SimTime queue_wait = 0;
    std::int32_t data_packets = 0;
    bool incast_flag = false;
    std::int64_t response_length = kNoResponse;
    std::vector<std::uint8_t> payload;  // verification mode

    std::int64_t remaining() const { return length - bytes_received; }
    bool needs_grants() const { return granted < length; }
  };

  struct ClientRpc {
    std::uint64_t rpc_id = 0;
    HostId server = -1;
    std::int64_t request_length = 0;
    std::int64_t response_length = 0;
    SimTime issued_at = 0;
    EventHandle response_timer;
    std::int32_t retries = 0;
    bool response_started = false;
  };

  static constexpr std::int64_t kNoResponse = -1;

  // --- sender side ---
  std::uint64_t submit_message(HostId dst, std::int64_t bytes, MsgDir dir,
                               std::int64_t response_length, bool incast_flag);
  void pump();
  bool nic_fits(std::int32_t wire_bytes) const;
  PacketPtr next_data_packet(SenderMsg& msg);
  void commit_data_packet(SenderMsg& msg, const PacketPtr& p);
  void send_control(PacketPtr p);
  void sx_on_grant(const PacketPtr& p);
  void sx_on_resend(const PacketPtr& p);
  void sx_finish_if_done(std::uint64_t rpc_id);
  void index_remove(const SenderMsg& msg);
  void index_add(const SenderMsg& msg);
  void arm_oneway_gc(SenderMsg& msg);
  const PriorityAllocation& alloc_for(HostId dst) const;
  void attach_cutoffs(Packet& p);

  // --- receiver side ---
  void rx_on_data(const PacketPtr& p);
  void rx_update_active_set();
  void rx_maybe_grant(ReceiverMsg& msg);
  void rx_arm_timer(ReceiverMsg& msg);
  void rx_on_timer(std::uint64_t rpc_id);
  void rx_complete(ReceiverMsg& msg);
  void rx_abort(ReceiverMsg& msg);
  void rx_on_busy(const PacketPtr& p);
  void rx_rearm_rpc_timer(ClientRpc& rpc);
  void rx_rpc_timer_body(ClientRpc& rpc);
  void rx_verify_payload(const ReceiverMsg& msg);

  void on_deliver(const PacketPtr& p);
  PacketPtr make_packet(PacketKind kind, HostId dst, std::int32_t payload_len);
  void finish_rpc(std::uint64_t rpc_id, bool aborted, SimTime finish);

  HostId id_;
  EventQueue& ev_;
  Network& net_;
  TransportConfig cfg_;
  PriorityAllocation static_alloc_;
  TransportHooks hooks_;
  SimTime horizon_ = 0;

  std::int64_t nic_limit_bytes_ = 0;
  std::int64_t default_unsched_ = 0;

  std::map<std::uint64_t, SenderMsg> outbound_;
  std::map<std::uint64_t, ReceiverMsg> inbound_;
  std::map<std::uint64_t, ClientRpc> rpcs_;
  std::deque<PacketPtr> control_q_;
  // (remaining bytes, submit order, rpc) of transmittable messages.
  std::set<std::tuple<std::int64_t, std::uint64_t, std::uint64_t>> xmit_index_;

  std::uint64_t next_local_id_ = 1;
  std::uint64_t next_submit_seq_ = 1;
  std::uint64_t next_arrival_seq_ = 1;
  std::int32_t outstanding_rpcs_ = 0;
  std::int32_t denied_count_ = 0;
  Counters counters_;

  // Online estimation state.
  std::unique_ptr<WorkloadEstimator> estimator_;
  std::map<HostId, PriorityAllocation> learned_alloc_;
  std::map<HostId, std::uint32_t> learned_version_;
  std::map<HostId, std::uint32_t> sent_version_;
};

}  // namespace homa
