#pragma once

#include <cstdint>

#include "homa/fabric/packet.h"
#include "homa/fabric/wire.h"
#include "homa/sim/time.h"

namespace homa {

// Two-level leaf/spine fabric. Defaults reproduce the 144-host evaluation
// setup: 9 racks of 16 hosts, 10 Gbps host links, 40 Gbps TOR-aggregation
// links, 250 ns switch internal delay, 1.5 us host software turnaround,
// store-and-forward everywhere, zero propagation delay.
struct Topology {
  std::int32_t num_racks = 9;
  std::int32_t hosts_per_rack = 16;
  std::int32_t num_aggr_switches = 4;
  double host_link_gbps = 10.0;
  double core_link_gbps = 40.0;
  SimTime switch_delay = 250;
  SimTime sw_turnaround = 1500;

  std::int64_t buffer_limit_bytes = 1 << 20;  // per egress port, all queues
  double loss_rate = 0.0;

  std::int32_t num_hosts() const { return num_racks * hosts_per_rack; }
  std::int32_t rack_of(HostId h) const { return h / hosts_per_rack; }
};

// Closed-form cross-rack round trip: a minimal control packet out, software
// turnaround, a full-size DATA packet back, and the receive-side turnaround
// before the data is usable. Matches what the fabric simulates; used to
// derive the default RTTbytes.
SimTime estimate_rtt_ns(const Topology& topo, const WireModel& wire);

// estimate_rtt_ns converted to bytes at the host link rate.
std::int64_t estimate_rtt_bytes(const Topology& topo, const WireModel& wire);

}  // namespace homa
