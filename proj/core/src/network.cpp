#include "homa/fabric/network.h"

#include <algorithm>
#include <cassert>

#include "homa/sim/error.h"

namespace homa {

namespace {
// Substream ids; keep spraying and loss decoupled from all other consumers.
constexpr std::uint64_t kSprayStream = 0xFA1;
constexpr std::uint64_t kLossStream = 0xFA2;
}  // namespace

const char* port_kind_name(PortKind k) {
  switch (k) {
    case PortKind::TorUplink: return "tor_up";
    case PortKind::AggrDownlink: return "aggr_down";
    case PortKind::TorDownlink: return "tor_down";
  }
  return "?";
}

// ---------------------------------------------------------------- EgressPort

EgressPort::EgressPort(EventQueue& ev, PortKind kind, std::string name,
                       LinkRate rate, std::int64_t buffer_limit)
    : ev_(ev),
      kind_(kind),
      name_(std::move(name)),
      rate_(rate),
      buffer_limit_(buffer_limit) {}

bool EgressPort::enqueue(const PacketPtr& p) {
  const SimTime now = ev_.now();
  p->hop_arrival = now;
  p->hop_preempt = 0;
  if (!busy_) {
    // Goes straight to the serializer; never counts as queued.
    account(now);
    busy_ = true;
    busy_priority_ = p->wire_priority;
    busy_until_ = now + rate_.serialize_ns(p->wire_bytes);
    if (on_idle_change_) on_idle_change_(false);
    PacketPtr pkt = p;
    ev_.schedule(busy_until_, [this, pkt] {
      bytes_by_prio_[pkt->wire_priority] += pkt->wire_bytes;
      ++packets_;
      if (on_complete_) on_complete_(pkt);
      start_next();
    });
    return true;
  }
  if (queued_bytes_ + p->wire_bytes > buffer_limit_) {
    ++drops_;
    return false;
  }
  // A lower-priority packet can be mid-serialization; its residual time is
  // the only preemption-lag interval this packet can ever see here, because
  // strict priority never starts a lower-priority packet while we wait.
  if (busy_priority_ < p->wire_priority) p->hop_preempt = busy_until_ - now;
  account(now);
  queues_[p->wire_priority].push_back(p);
  queued_bytes_ += p->wire_bytes;
  max_bytes_ = std::max(max_bytes_, queued_bytes_);
  return true;
}

void EgressPort::start_next() {
  const SimTime now = ev_.now();
  for (int prio = kNumPriorities - 1; prio >= 0; --prio) {
    auto& q = queues_[prio];
    if (q.empty()) continue;
    PacketPtr pkt = q.front();
    q.pop_front();
    account(now);
    queued_bytes_ -= pkt->wire_bytes;
    const SimTime waited = now - pkt->hop_arrival;
    pkt->preempt_wait += pkt->hop_preempt;
    pkt->queue_wait += waited - pkt->hop_preempt;
    busy_ = true;
    busy_priority_ = pkt->wire_priority;
    busy_until_ = now + rate_.serialize_ns(pkt->wire_bytes);
    ev_.schedule(busy_until_, [this, pkt] {
      bytes_by_prio_[pkt->wire_priority] += pkt->wire_bytes;
      ++packets_;
      if (on_complete_) on_complete_(pkt);
      start_next();
    });
    return;
  }
  busy_ = false;
  if (on_idle_change_) on_idle_change_(true);
}

void EgressPort::account(SimTime now) {
  byte_ns_integral_ +=
      static_cast<double>(queued_bytes_) * static_cast<double>(now - last_change_);
  last_change_ = now;
}

PortStats EgressPort::stats(SimTime run_duration) const {
  PortStats s;
  double integral = byte_ns_integral_;
  if (run_duration > last_change_) {
    integral += static_cast<double>(queued_bytes_) *
                static_cast<double>(run_duration - last_change_);
  }
  s.mean_bytes = run_duration > 0 ? integral / static_cast<double>(run_duration) : 0.0;
  s.max_bytes = max_bytes_;
  s.drops = drops_;
  s.packets = packets_;
  return s;
}

// ------------------------------------------------------------------ NicQueue

NicQueue::NicQueue(EventQueue& ev, LinkRate rate) : ev_(ev), rate_(rate) {}

void NicQueue::send(const PacketPtr& p) {
  p->hop_arrival = ev_.now();
  p->hop_preempt = 0;
  untransmitted_ += p->wire_bytes;
  fifo_.push_back(p);
  if (!busy_) start_next();
}

void NicQueue::start_next() {
  if (fifo_.empty()) {
    busy_ = false;
    return;
  }
  const SimTime now = ev_.now();
  PacketPtr pkt = fifo_.front();
  fifo_.pop_front();
  const SimTime waited = now - pkt->hop_arrival;
  pkt->queue_wait += waited;  // FIFO NIC: any wait is queueing by definition
  busy_ = true;
  const SimTime done = now + rate_.serialize_ns(pkt->wire_bytes);
  ev_.schedule(done, [this, pkt] {
    // The packet counts as untransmitted until fully serialized.
    untransmitted_ -= pkt->wire_bytes;
    if (on_complete_) on_complete_(pkt);
    start_next();
    if (on_drain_) on_drain_();
  });
}

// ------------------------------------------------------------------- Network

Network::Network(EventQueue& ev, const Topology& topo, const WireModel& wire,
                 std::uint64_t seed)
    : ev_(ev),
      topo_(topo),
      wire_(wire),
      spray_rng_(Rng::substream(seed, kSprayStream)),
      loss_rng_(Rng::substream(seed, kLossStream)) {
  const auto host_rate = LinkRate::gbps(topo_.host_link_gbps);
  const auto core_rate = LinkRate::gbps(topo_.core_link_gbps);
  const int R = topo_.num_racks;
  const int A = topo_.num_aggr_switches;

  for (HostId h = 0; h < topo_.num_hosts(); ++h) {
    nics_.push_back(std::make_unique<NicQueue>(ev_, host_rate));
    tor_down_.push_back(std::make_unique<EgressPort>(
        ev_, PortKind::TorDownlink,
        "tor" + std::to_string(topo_.rack_of(h)) + ".down.h" + std::to_string(h),
        host_rate, topo_.buffer_limit_bytes));
  }
  for (int r = 0; r < R; ++r) {
    for (int a = 0; a < A; ++a) {
      tor_up_.push_back(std::make_unique<EgressPort>(
          ev_, PortKind::TorUplink,
          "tor" + std::to_string(r) + ".up.a" + std::to_string(a), core_rate,
          topo_.buffer_limit_bytes));
    }
  }
  for (int a = 0; a < A; ++a) {
    for (int r = 0; r < R; ++r) {
      aggr_down_.push_back(std::make_unique<EgressPort>(
          ev_, PortKind::AggrDownlink,
          "aggr" + std::to_string(a) + ".down.r" + std::to_string(r), core_rate,
          topo_.buffer_limit_bytes));
    }
  }
  deliver_fn_.resize(topo_.num_hosts());
  spray_counts_.assign(static_cast<std::size_t>(R) * A, 0);

  for (HostId h = 0; h < topo_.num_hosts(); ++h) {
    nics_[h]->set_on_complete(
        [this, h](const PacketPtr& p) { on_host_uplink_done(h, p); });
    tor_down_[h]->set_on_complete(
        [this, h](const PacketPtr& p) { on_tor_downlink_done(h, p); });
  }
  for (int r = 0; r < R; ++r) {
    for (int a = 0; a < A; ++a) {
      tor_up_[r * A + a]->set_on_complete(
          [this, a](const PacketPtr& p) { on_tor_uplink_done(p, a); });
    }
  }
  for (int a = 0; a < A; ++a) {
    for (int r = 0; r < R; ++r) {
      aggr_down_[a * R + r]->set_on_complete(
          [this](const PacketPtr& p) { on_aggr_downlink_done(p); });
    }
  }
}

void Network::attach_host(HostId h, DeliverFn fn) {
  deliver_fn_[h] = std::move(fn);
}

std::int64_t Network::nic_untransmitted(HostId h) const {
  return nics_[h]->untransmitted_bytes();
}

void Network::set_nic_drain_cb(HostId h, std::function<void()> cb) {
  nics_[h]->set_on_drain(std::move(cb));
}

void Network::nic_send(HostId h, const PacketPtr& p) {
  if (p->wire_bytes <= 0) throw SimError("nic_send: packet without wire_bytes");
  if (p->dst < 0 || p->dst >= topo_.num_hosts() || p->dst == h) {
    throw SimError("nic_send: bad destination host");
  }
  counters_.bytes_injected += p->wire_bytes;
  ++counters_.packets_injected;
  nics_[h]->send(p);
}

void Network::on_host_uplink_done(HostId h, const PacketPtr& p) {
  const int src_rack = topo_.rack_of(h);
  const int dst_rack = topo_.rack_of(p->dst);
  if (src_rack == dst_rack) {
    ev_.schedule_in(topo_.switch_delay, [this, p] {
      if (!tor_down_[p->dst]->enqueue(p)) drop(p);
    });
    return;
  }
  const int A = topo_.num_aggr_switches;
  const auto aggr = static_cast<std::int32_t>(spray_rng_.next_below(A));
  ++spray_counts_[src_rack * A + aggr];
  EgressPort* up = tor_up_[src_rack * A + aggr].get();
  ev_.schedule_in(topo_.switch_delay, [this, up, p] {
    if (!up->enqueue(p)) drop(p);
  });
}

void Network::on_tor_uplink_done(const PacketPtr& p, std::int32_t aggr) {
  EgressPort* down =
      aggr_down_[aggr * topo_.num_racks + topo_.rack_of(p->dst)].get();
  ev_.schedule_in(topo_.switch_delay, [this, down, p] {
    if (!down->enqueue(p)) drop(p);
  });
}

void Network::on_aggr_downlink_done(const PacketPtr& p) {
  ev_.schedule_in(topo_.switch_delay, [this, p] {
    if (!tor_down_[p->dst]->enqueue(p)) drop(p);
  });
}

void Network::on_tor_downlink_done(HostId h, const PacketPtr& p) {
  deliver(h, p);
}

void Network::deliver(HostId h, const PacketPtr& p) {
  if (topo_.loss_rate > 0 && loss_rng_.next_double() < topo_.loss_rate) {
    drop(p);
    return;
  }
  if (delivery_filter_ && delivery_filter_(*p)) {
    drop(p);
    return;
  }
  counters_.bytes_delivered += p->wire_bytes;
  ++counters_.packets_delivered;
  if ((p->kind == PacketKind::Data && !p->retransmit) ||
      p->kind == PacketKind::Grant) {
    counters_.goodput_bytes_delivered += p->wire_bytes;
  }
  if (delivery_stats_) delivery_stats_(*p, ev_.now());
  if (!deliver_fn_[h]) return;
  ev_.schedule_in(topo_.sw_turnaround, [this, h, p] { deliver_fn_[h](p); });
}

void Network::drop(const PacketPtr& p) {
  counters_.bytes_dropped += p->wire_bytes;
  ++counters_.packets_dropped;
}

std::vector<Network::PortReport> Network::port_reports(SimTime duration) const {
  std::vector<PortReport> out;
  auto add = [&](const EgressPort& port) {
    out.push_back(PortReport{port.name(), port.kind(), port.stats(duration)});
  };
  for (const auto& p : tor_up_) add(*p);
  for (const auto& p : aggr_down_) add(*p);
  for (const auto& p : tor_down_) add(*p);
  return out;
}

std::array<std::int64_t, kNumPriorities> Network::downlink_bytes_by_priority()
    const {
  std::array<std::int64_t, kNumPriorities> sum{};
  for (const auto& p : tor_down_) {
    const auto& by = p->bytes_by_priority();
    for (int i = 0; i < kNumPriorities; ++i) sum[i] += by[i];
  }
  return sum;
}

PortStats Network::aggregate_stats(PortKind kind, SimTime duration) const {
  PortStats agg;
  std::size_t n = 0;
  auto fold = [&](const EgressPort& port) {
    if (port.kind() != kind) return;
    PortStats s = port.stats(duration);
    agg.mean_bytes += s.mean_bytes;
    agg.max_bytes = std::max(agg.max_bytes, s.max_bytes);
    agg.drops += s.drops;
    agg.packets += s.packets;
    ++n;
  };
  for (const auto& p : tor_up_) fold(*p);
  for (const auto& p : aggr_down_) fold(*p);
  for (const auto& p : tor_down_) fold(*p);
  if (n > 0) agg.mean_bytes /= static_cast<double>(n);
  return agg;
}

SimTime estimate_rtt_ns(const Topology& topo, const WireModel& wire) {
  const auto host = LinkRate::gbps(topo.host_link_gbps);
  const auto core = LinkRate::gbps(topo.core_link_gbps);
  const bool cross_rack = topo.num_racks > 1;
  const int switch_hops = cross_rack ? 3 : 1;

  auto one_way = [&](std::int32_t wire_bytes) {
    SimTime t = host.serialize_ns(wire_bytes) + host.serialize_ns(wire_bytes);
    if (cross_rack) t += 2 * core.serialize_ns(wire_bytes);
    return t + switch_hops * topo.switch_delay;
  };
  // Minimal control packet out, turnaround, full-size DATA back, turnaround
  // before the receiver's protocol layer sees the data.
  return one_way(wire.wire_bytes(0)) + topo.sw_turnaround +
         one_way(wire.full_size_wire()) + topo.sw_turnaround;
}

std::int64_t estimate_rtt_bytes(const Topology& topo, const WireModel& wire) {
  const double gbps = topo.host_link_gbps;
  return static_cast<std::int64_t>(
      static_cast<double>(estimate_rtt_ns(topo, wire)) * gbps / 8.0 + 0.5);
}

}  // namespace homa
