#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "homa/fabric/topology.h"
#include "homa/fabric/wire.h"
#include "homa/prio/size_dist.h"
#include "homa/proto/transport.h"
#include "homa/sim/event_queue.h"
#include "homa/sim/rng.h"

namespace homa {

enum class WorkloadMode : std::uint8_t { OneWay, Rpc };

struct WorkloadSpec {
  SizeDistribution cdf;
  double target_load = 0.8;  // fraction of host link bandwidth, goodput
  WorkloadMode mode = WorkloadMode::OneWay;
  SimTime duration = 50 * kMillisecond;

  // RPC mode. rpc_request/rpc_response <= 0 mean "echo the drawn size".
  std::int64_t rpc_request = 0;
  std::int64_t rpc_response = 0;

  // Incast: a batch of `fanout` concurrent RPCs round-robined over the other
  // hosts, issued by host 0 every incast_interval (fanout <= 1 disables and
  // traffic is Poisson instead).
  std::int32_t fanout = 1;
  SimTime incast_interval = 10 * kMillisecond;
};

// Expected goodput wire bytes for one message of the given size: payload,
// per-packet framing, and one GRANT per scheduled packet. Load is defined
// against this quantity; retransmissions never count.
double goodput_bytes_for(std::int64_t size, const WireModel& wire,
                         std::int64_t unsched_limit);

// Messages per second per sender for the requested load.
double calibrate_rate(const WorkloadSpec& spec, const WireModel& wire,
                      double host_link_gbps, std::int64_t unsched_limit);

// Open-loop traffic source: per-sender Poisson arrivals, sizes drawn from
// the CDF, destinations uniform over the other hosts. Arrivals never react
// to protocol backpressure.
class WorkloadGenerator {
 public:
  WorkloadGenerator(EventQueue& ev, const WorkloadSpec& spec,
                    const Topology& topo, const WireModel& wire,
                    std::int64_t unsched_limit,
                    std::vector<std::unique_ptr<HostTransport>>& hosts,
                    std::uint64_t seed);

  void start();

  // Offered goodput bytes for messages submitted in [from, to).
  double offered_goodput_bytes(SimTime from, SimTime to) const;
  std::uint64_t messages_submitted() const { return submitted_; }

 private:
  void arm_next(HostId sender);
  void emit(HostId sender);
  void issue_incast_batch();

  EventQueue& ev_;
  WorkloadSpec spec_;
  Topology topo_;
  WireModel wire_;
  std::int64_t unsched_limit_;
  std::vector<std::unique_ptr<HostTransport>>& hosts_;
  std::vector<std::unique_ptr<Rng>> rngs_;  // one stream per sender
  double rate_per_sender_ = 0;              // messages per second
  std::uint64_t submitted_ = 0;
  std::int32_t batches_issued_ = 0;

  struct OfferedSample {
    SimTime at;
    double cum_bytes;
  };
  std::vector<OfferedSample> offered_;  // cumulative, per submission
  double offered_cum_ = 0;
};

}  // namespace homa
