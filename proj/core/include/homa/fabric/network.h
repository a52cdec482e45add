#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "homa/fabric/packet.h"
#include "homa/fabric/topology.h"
#include "homa/fabric/wire.h"
#include "homa/sim/event_queue.h"
#include "homa/sim/rng.h"

namespace homa {

enum class PortKind : std::uint8_t {
  TorUplink,     // TOR -> aggregation (sprayed)
  AggrDownlink,  // aggregation -> TOR (determined by destination rack)
  TorDownlink,   // TOR -> host
};

const char* port_kind_name(PortKind k);

struct PortStats {
  double mean_bytes = 0;      // time-weighted queued bytes
  std::int64_t max_bytes = 0;
  std::uint64_t drops = 0;
  std::uint64_t packets = 0;  // transmissions completed
};

// One egress port with 8 strict-priority FIFO queues sharing a byte budget.
// Queued-byte statistics exclude the packet being serialized, matching how
// the queue-length numbers are reported.
class EgressPort {
 public:
  EgressPort(EventQueue& ev, PortKind kind, std::string name, LinkRate rate,
             std::int64_t buffer_limit);

  // Hands a packet to the port; starts transmitting immediately when idle.
  // Returns false (and drops) when the buffer is full.
  bool enqueue(const PacketPtr& p);

  void set_on_complete(std::function<void(const PacketPtr&)> cb) {
    on_complete_ = std::move(cb);
  }
  // Fires on busy/idle transitions; used by the wasted-bandwidth monitor.
  void set_on_idle_change(std::function<void(bool idle)> cb) {
    on_idle_change_ = std::move(cb);
  }

  bool idle() const { return !busy_; }
  PortKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  LinkRate rate() const { return rate_; }

  PortStats stats(SimTime run_duration) const;
  std::int64_t queued_bytes() const { return queued_bytes_; }

  // Per-priority wire bytes transmitted (priority-usage reports).
  const std::array<std::int64_t, kNumPriorities>& bytes_by_priority() const {
    return bytes_by_prio_;
  }

 private:
  void start_next();
  void account(SimTime now);

  EventQueue& ev_;
  PortKind kind_;
  std::string name_;
  LinkRate rate_;
  std::int64_t buffer_limit_;

  std::array<std::deque<PacketPtr>, kNumPriorities> queues_;
  std::int64_t queued_bytes_ = 0;
  bool busy_ = false;
  std::uint8_t busy_priority_ = 0;
  SimTime busy_until_ = 0;

  // occupancy integral for the time-weighted mean
  SimTime last_change_ = 0;
  double byte_ns_integral_ = 0;
  std::int64_t max_bytes_ = 0;
  std::uint64_t drops_ = 0;
  std::uint64_t packets_ = 0;
  std::array<std::int64_t, kNumPriorities> bytes_by_prio_{};

  std::function<void(const PacketPtr&)> on_complete_;
  std::function<void(bool)> on_idle_change_;
};

// Sender-side NIC transmit queue: plain FIFO. The transport enforces the
// untransmitted-byte cap, so this queue never drops; it reports back when a
// packet finishes serializing so the transport can refill.
class NicQueue {
 public:
  NicQueue(EventQueue& ev, LinkRate rate);

  void send(const PacketPtr& p);
  std::int64_t untransmitted_bytes() const { return untransmitted_; }

  void set_on_complete(std::function<void(const PacketPtr&)> cb) {
    on_complete_ = std::move(cb);
  }
  void set_on_drain(std::function<void()> cb) { on_drain_ = std::move(cb); }

 private:
  void start_next();

  EventQueue& ev_;
  LinkRate rate_;
  std::deque<PacketPtr> fifo_;
  bool busy_ = false;
  std::int64_t untransmitted_ = 0;
  std::function<void(const PacketPtr&)> on_complete_;
  std::function<void()> on_drain_;
};

struct FabricCounters {
  std::int64_t bytes_injected = 0;
  std::int64_t bytes_delivered = 0;
  std::int64_t bytes_dropped = 0;       // buffer overflow + injected loss
  std::int64_t goodput_bytes_delivered = 0;  // non-retransmit DATA + GRANT
  std::uint64_t packets_injected = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_dropped = 0;
};

// The simulated network: host NICs, TOR and aggregation switches with
// strict-priority egress ports, per-packet spraying on TOR uplinks,
// store-and-forward at every hop, zero propagation delay.
class Network {
 public:
  using DeliverFn = std::function<void(const PacketPtr&)>;

  Network(EventQueue& ev, const Topology& topo, const WireModel& wire,
          std::uint64_t seed);

  // Protocol layer for a host. Invoked sw_turnaround after full reception.
  void attach_host(HostId h, DeliverFn fn);

  // --- sender-side NIC interface ---
  std::int64_t nic_untransmitted(HostId h) const;
  void nic_send(HostId h, const PacketPtr& p);  // fills in wire_bytes
  void set_nic_drain_cb(HostId h, std::function<void()> cb);

  // --- observability ---
  const Topology& topology() const { return topo_; }
  const WireModel& wire() const { return wire_; }
  const FabricCounters& counters() const { return counters_; }
  EgressPort& tor_downlink(HostId h) { return *tor_down_[h]; }

  struct PortReport {
    std::string name;
    PortKind kind;
    PortStats stats;
  };
  std::vector<PortReport> port_reports(SimTime duration) const;

  // Aggregated per-priority wire bytes over all TOR->host downlinks.
  std::array<std::int64_t, kNumPriorities> downlink_bytes_by_priority() const;

  // Per-kind aggregate means/maxima (buffer-occupancy criteria).
  PortStats aggregate_stats(PortKind kind, SimTime duration) const;

  std::uint64_t spray_count(std::int32_t rack, std::int32_t aggr) const {
    return spray_counts_[rack * topo_.num_aggr_switches + aggr];
  }

  // Test hook: return true to drop the packet at its delivery point.
  void set_delivery_filter(std::function<bool(const Packet&)> f) {
    delivery_filter_ = std::move(f);
  }

  // Observes every delivered packet (after the loss draw, before the
  // software turnaround).
  void set_delivery_stats(std::function<void(const Packet&, SimTime)> f) {
    delivery_stats_ = std::move(f);
  }

 private:
  void on_host_uplink_done(HostId h, const PacketPtr& p);
  void on_tor_uplink_done(const PacketPtr& p, std::int32_t aggr);
  void on_aggr_downlink_done(const PacketPtr& p);
  void on_tor_downlink_done(HostId h, const PacketPtr& p);
  void deliver(HostId h, const PacketPtr& p);
  void drop(const PacketPtr& p);

  EventQueue& ev_;
  Topology topo_;
  WireModel wire_;
  Rng spray_rng_;
  Rng loss_rng_;

  std::vector<std::unique_ptr<NicQueue>> nics_;          // per host
  std::vector<std::unique_ptr<EgressPort>> tor_down_;    // per host
  std::vector<std::unique_ptr<EgressPort>> tor_up_;      // rack x aggr
  std::vector<std::unique_ptr<EgressPort>> aggr_down_;   // aggr x rack
  std::vector<DeliverFn> deliver_fn_;
  std::vector<std::uint64_t> spray_counts_;

  FabricCounters counters_;
  std::function<bool(const Packet&)> delivery_filter_;
  std::function<void(const Packet&, SimTime)> delivery_stats_;
};

}  // namespace homa
