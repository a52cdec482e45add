#include "homa/load/workload.h"

#include <algorithm>
#include <cmath>

#include "homa/sim/error.h"

namespace homa {

double goodput_bytes_for(std::int64_t size, const WireModel& wire,
                         std::int64_t unsched_limit) {
  const std::int64_t data_packets =
      (size + wire.max_payload - 1) / wire.max_payload;
  const std::int64_t sched_bytes = std::max<std::int64_t>(0, size - unsched_limit);
  const std::int64_t grants =
      (sched_bytes + wire.max_payload - 1) / wire.max_payload;
  return static_cast<double>(size) +
         static_cast<double>(data_packets + grants) * wire.per_packet_overhead;
}

double calibrate_rate(const WorkloadSpec& spec, const WireModel& wire,
                      double host_link_gbps, std::int64_t unsched_limit) {
  if (spec.target_load <= 0) return 0;
  double mean_goodput = 0;
  const auto& atoms = spec.cdf.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    mean_goodput +=
        goodput_bytes_for(atoms[i].size, wire, unsched_limit) * spec.cdf.prob(i);
  }
  const double bits_per_second = host_link_gbps * 1e9;
  return spec.target_load * bits_per_second / (8.0 * mean_goodput);
}

WorkloadGenerator::WorkloadGenerator(
    EventQueue& ev, const WorkloadSpec& spec, const Topology& topo,
    const WireModel& wire, std::int64_t unsched_limit,
    std::vector<std::unique_ptr<HostTransport>>& hosts, std::uint64_t seed)
    : ev_(ev),
      spec_(spec),
      topo_(topo),
      wire_(wire),
      unsched_limit_(unsched_limit),
      hosts_(hosts) {
  if (spec_.target_load < 0 || spec_.target_load >= 1.0) {
    throw ConfigError("workload: target load must be in [0, 1)");
  }
  for (HostId h = 0; h < topo_.num_hosts(); ++h) {
    rngs_.push_back(
        std::make_unique<Rng>(Rng::substream(seed, 0x100 + static_cast<std::uint64_t>(h))));
  }
  rate_per_sender_ = calibrate_rate(spec_, wire_, topo_.host_link_gbps, unsched_limit_);
}

void WorkloadGenerator::start() {
  if (spec_.mode == WorkloadMode::Rpc && spec_.fanout > 1) {
    issue_incast_batch();
    return;
  }
  if (rate_per_sender_ <= 0) return;
  for (HostId h = 0; h < topo_.num_hosts(); ++h) arm_next(h);
}

void WorkloadGenerator::arm_next(HostId sender) {
  const double gap_s = rngs_[sender]->exponential(1.0 / rate_per_sender_);
  const auto gap_ns = static_cast<SimTime>(gap_s * 1e9 + 0.5);
  const SimTime at = ev_.now() + std::max<SimTime>(gap_ns, 1);
  if (at > spec_.duration) return;  // open loop ends with the run window
  ev_.schedule(at, [this, sender] {
    emit(sender);
    arm_next(sender);
  });
}

void WorkloadGenerator::emit(HostId sender) {
  Rng& rng = *rngs_[sender];
  const std::int64_t size = spec_.cdf.sample(rng);
  // Uniform over the other hosts.
  auto dst = static_cast<HostId>(rng.next_below(topo_.num_hosts() - 1));
  if (dst >= sender) ++dst;

  ++submitted_;
  offered_cum_ += goodput_bytes_for(size, wire_, unsched_limit_);
  offered_.push_back(OfferedSample{ev_.now(), offered_cum_});

  if (spec_.mode == WorkloadMode::OneWay) {
    hosts_[sender]->submit_oneway(dst, size);
  } else {
    const std::int64_t req = spec_.rpc_request > 0 ? spec_.rpc_request : size;
    const std::int64_t resp = spec_.rpc_response > 0 ? spec_.rpc_response : size;
    hosts_[sender]->issue_rpc(dst, req, resp);
  }
}

void WorkloadGenerator::issue_incast_batch() {
  const HostId client = 0;
  Rng& rng = *rngs_[client];
  const std::int32_t servers = topo_.num_hosts() - 1;
  for (std::int32_t i = 0; i < spec_.fanout; ++i) {
    const HostId dst = 1 + (i % servers);
    const std::int64_t drawn = spec_.cdf.sample(rng);
    const std::int64_t req = spec_.rpc_request > 0 ? spec_.rpc_request : drawn;
    const std::int64_t resp = spec_.rpc_response > 0 ? spec_.rpc_response : drawn;
    ++submitted_;
    offered_cum_ += goodput_bytes_for(resp, wire_, unsched_limit_);
    offered_.push_back(OfferedSample{ev_.now(), offered_cum_});
    hosts_[client]->issue_rpc(dst, req, resp);
  }
  ++batches_issued_;
  const SimTime next = ev_.now() + spec_.incast_interval;
  if (next <= spec_.duration) {
    ev_.schedule(next, [this] { issue_incast_batch(); });
  }
}

double WorkloadGenerator::offered_goodput_bytes(SimTime from, SimTime to) const {
  auto cum_at = [this](SimTime t) -> double {
    // Last sample with at <= t.
    auto it = std::upper_bound(
        offered_.begin(), offered_.end(), t,
        [](SimTime v, const OfferedSample& s) { return v < s.at; });
    if (it == offered_.begin()) return 0;
    return std::prev(it)->cum_bytes;
  };
  return cum_at(to) - cum_at(from);
}

}  // namespace homa
