#include "homa/proto/transport.h"

#include <algorithm>
#include <cassert>

#include "homa/sim/error.h"

namespace homa {

std::uint8_t payload_byte(std::uint64_t rpc_id, std::int64_t index) {
  std::uint64_t z = rpc_id + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index);
  z = (z ^ (z >> 29)) * 0xbf58476d1ce4e5b9ULL;
  return static_cast<std::uint8_t>(z ^ (z >> 32));
}

HostTransport::HostTransport(HostId id, EventQueue& ev, Network& net,
                             const TransportConfig& cfg,
                             const PriorityAllocation& alloc,
                             TransportHooks hooks)
    : id_(id), ev_(ev), net_(net), cfg_(cfg), static_alloc_(alloc), hooks_(hooks) {
  if (cfg_.rtt_bytes <= 0) throw SimError("transport: rtt_bytes unresolved");
  nic_limit_bytes_ =
      static_cast<std::int64_t>(cfg_.nic_queue_packets) * net_.wire().full_size_wire();
  default_unsched_ = cfg_.unsched_limit >= 0 ? cfg_.unsched_limit : cfg_.rtt_bytes;

  net_.attach_host(id_, [this](const PacketPtr& p) { on_deliver(p); });
  net_.set_nic_drain_cb(id_, [this] { pump(); });

  if (cfg_.online_estimation) {
    estimator_ = std::make_unique<WorkloadEstimator>(
        static_alloc_, default_unsched_ > 0 ? default_unsched_ : cfg_.rtt_bytes,
        cfg_.total_levels);
    // Periodic recompute; stops at the horizon so drain phases terminate.
    struct Loop {
      HostTransport* t;
      void operator()() const {
        t->estimator_->recompute();
        if (t->horizon_ == 0 || t->ev_.now() < t->horizon_) {
          t->ev_.schedule_in(t->cfg_.estimator_interval, Loop{t});
        }
      }
    };
    ev_.schedule_in(cfg_.estimator_interval, Loop{this});
  }
}

const PriorityAllocation& HostTransport::alloc_for(HostId dst) const {
  if (cfg_.online_estimation) {
    auto it = learned_alloc_.find(dst);
    if (it != learned_alloc_.end()) return it->second;
  }
  return static_alloc_;
}

// ----------------------------------------------------------------- sender

std::uint64_t HostTransport::submit_oneway(HostId dst, std::int64_t bytes) {
  return submit_message(dst, bytes, MsgDir::Request, kNoResponse, false);
}

std::uint64_t HostTransport::issue_rpc(HostId server, std::int64_t request_bytes,
                                       std::int64_t response_bytes) {
  // Strictly "exceeds": with threshold T, the first T+1 requests go unflagged.
  const bool flag = outstanding_rpcs_ > cfg_.incast_threshold;
  ++outstanding_rpcs_;
  ClientRpc rpc;
  rpc.server = server;
  rpc.request_length = request_bytes;
  rpc.response_length = response_bytes;
  rpc.issued_at = ev_.now();
  const std::uint64_t rpc_id =
      submit_message(server, request_bytes, MsgDir::Request, response_bytes, flag);
  rpc.rpc_id = rpc_id;
  auto [it, ok] = rpcs_.emplace(rpc_id, std::move(rpc));
  assert(ok);
  rx_rearm_rpc_timer(it->second);
  return rpc_id;
}

std::uint64_t HostTransport::submit_message(
    HostId dst, std::int64_t bytes, MsgDir dir, std::int64_t response_length,
    bool incast_flag) {
  if (bytes < 1) throw SimError("submit: message length must be >= 1");
  SenderMsg msg;
  msg.rpc_id = (static_cast<std::uint64_t>(id_) << 40) | next_local_id_++;
  msg.dst = dst;
  msg.dir = dir;
  msg.length = bytes;
  msg.submit_seq = next_submit_seq_++;
  msg.submitted_at = ev_.now();
  msg.incast_flag = incast_flag;
  msg.response_length = response_length;

  std::int64_t limit = default_unsched_;
  if (dir == MsgDir::Response && incast_flag) {
    limit = std::min<std::int64_t>(limit, cfg_.incast_unsched_limit);
  }
  msg.unsched_bytes = static_cast<std::int32_t>(std::min(bytes, limit));
  msg.granted = msg.unsched_bytes;
  msg.announce_pending = msg.unsched_bytes == 0;
  msg.unsched_prio = unsched_priority_for(bytes, alloc_for(dst));

  const std::uint64_t rpc_id = msg.rpc_id;
  auto [it, ok] = outbound_.emplace(rpc_id, std::move(msg));
  assert(ok);
  index_add(it->second);
  pump();
  return rpc_id;
}

void HostTransport::index_remove(const SenderMsg& msg) {
  xmit_index_.erase({msg.remaining(), msg.submit_seq, msg.rpc_id});
}

void HostTransport::index_add(const SenderMsg& msg) {
  if (msg.transmittable()) {
    xmit_index_.insert({msg.remaining(), msg.submit_seq, msg.rpc_id});
  }
}

bool HostTransport::nic_fits(std::int32_t wire_bytes) const {
  return net_.nic_untransmitted(id_) + wire_bytes <= nic_limit_bytes_;
}

void HostTransport::send_control(PacketPtr p) {
  control_q_.push_back(std::move(p));
  pump();
}

void HostTransport::pump() {
  for (;;) {
    // Control packets always go out before DATA.
    if (!control_q_.empty()) {
      PacketPtr p = control_q_.front();
      if (!nic_fits(p->wire_bytes)) return;
      control_q_.pop_front();
      if (hooks_.trace) hooks_.trace->on_event(ev_.now(), "tx", id_, *p);
      net_.nic_send(id_, p);
      continue;
    }
    if (xmit_index_.empty()) return;
    // SRPT among transmittable DATA: fewest remaining bytes first, ties by
    // submission order. The wire priority of the packet plays no part here.
    auto key = *xmit_index_.begin();
    SenderMsg& msg = outbound_.at(std::get<2>(key));
    PacketPtr p = next_data_packet(msg);
    if (!nic_fits(p->wire_bytes)) {
      return;  // NIC already holds the untransmitted-byte cap
    }
    commit_data_packet(msg, p);
    if (hooks_.trace) hooks_.trace->on_event(ev_.now(), "tx", id_, *p);
    net_.nic_send(id_, p);
    ++counters_.data_packets_sent;
    sx_finish_if_done(std::get<2>(key));
  }
}

PacketPtr HostTransport::next_data_packet(SenderMsg& msg) {
  std::int64_t offset;
  std::int32_t plen;
  bool retx = false;
  if (!msg.retx_ranges.empty()) {
    const auto [lo, hi] = msg.retx_ranges.front();
    offset = lo;
    plen = static_cast<std::int32_t>(
        std::min<std::int64_t>(net_.wire().max_payload, hi - lo));
    retx = true;
  } else if (msg.announce_pending) {
    offset = 0;
    plen = 0;
  } else {
    offset = msg.next_offset;
    plen = static_cast<std::int32_t>(std::min<std::int64_t>(
        net_.wire().max_payload, msg.granted - msg.next_offset));
  }

  PacketPtr p = make_packet(PacketKind::Data, msg.dst, plen);
  p->rpc_id = msg.rpc_id;
  p->dir = msg.dir;
  p->offset = offset;
  p->length = plen;
  p->message_length = msg.length;
  p->unsched_bytes = msg.unsched_bytes;
  p->incast_flag = msg.incast_flag;
  p->response_length = msg.response_length;
  p->submitted_at = msg.submitted_at;
  p->retransmit = retx;
  const std::int32_t logical =
      offset < msg.unsched_bytes || msg.announce_pending ? msg.unsched_prio
                                                         : msg.sched_prio;
  p->logical_priority = static_cast<std::uint8_t>(logical);
  p->wire_priority = static_cast<std::uint8_t>(cfg_.wire_priority_of(logical));
  if (cfg_.verify_payload && plen > 0) {
    p->payload.resize(plen);
    for (std::int32_t i = 0; i < plen; ++i) {
      p->payload[i] = payload_byte(msg.rpc_id, offset + i);
    }
  }
  return p;
}

void HostTransport::commit_data_packet(SenderMsg& msg, const PacketPtr& p) {
  index_remove(msg);
  if (p->retransmit) {
    auto& front = msg.retx_ranges.front();
    front.first += p->length;
    if (front.first >= front.second) msg.retx_ranges.pop_front();
    counters_.retransmitted_bytes += p->length;
  } else if (msg.announce_pending) {
    msg.announce_pending = false;
  } else {
    msg.next_offset += p->length;
  }
  index_add(msg);
  if (msg.incast_flag && msg.dir == MsgDir::Response && !p->retransmit &&
      p->offset < msg.unsched_bytes && hooks_.metrics) {
    hooks_.metrics->on_flagged_unsched_bytes(p->length);
  }
}

void HostTransport::sx_finish_if_done(std::uint64_t rpc_id) {
  auto it = outbound_.find(rpc_id);
  if (it == outbound_.end()) return;
  SenderMsg& msg = it->second;
  if (msg.transmittable() || msg.next_offset < msg.length) return;

  if (msg.dir == MsgDir::Response) {
    // The server discards all RPC state as soon as the last response packet
    // has been handed off; late RESENDs take the unknown-RPC path.
    auto in = inbound_.find(rpc_id);
    if (in != inbound_.end()) {
      ev_.cancel(in->second.timer);
      inbound_.erase(in);
    }
    index_remove(msg);
    outbound_.erase(it);
    return;
  }
  if (msg.dir == MsgDir::Request && msg.response_length == kNoResponse) {
    arm_oneway_gc(msg);
  }
  // RPC requests stay until the response completes.
}

void HostTransport::arm_oneway_gc(SenderMsg& msg) {
  ev_.cancel(msg.gc_timer);
  const std::uint64_t rpc_id = msg.rpc_id;
  msg.gc_timer = ev_.schedule_in(cfg_.oneway_linger(), [this, rpc_id] {
    auto it = outbound_.find(rpc_id);
    if (it == outbound_.end() || it->second.transmittable()) return;
    index_remove(it->second);
    outbound_.erase(it);
  });
}

void HostTransport::sx_on_grant(const PacketPtr& p) {
  auto it = outbound_.find(p->rpc_id);
  if (it == outbound_.end()) return;
  SenderMsg& msg = it->second;
  index_remove(msg);
  msg.granted = std::max(msg.granted, std::min(p->offset, msg.length));
  msg.sched_prio = p->granted_priority;
  index_add(msg);
  pump();
}

void HostTransport::sx_on_resend(const PacketPtr& p) {
  auto it = outbound_.find(p->rpc_id);
  if (it == outbound_.end()) {
    if (p->dir == MsgDir::Response) {
      if (inbound_.count(p->rpc_id)) {
        // Request still arriving; tell the client we are alive.
        PacketPtr busy = make_packet(PacketKind::Busy, p->src, 0);
        busy->rpc_id = p->rpc_id;
        busy->dir = p->dir;
        ++counters_.busies_sent;
        send_control(busy);
      } else {
        // Unknown RPC: the request (or our discarded state) is gone. Ask for
        // the first RTTbytes of the request; the client will retransmit and
        // the operation re-executes.
        PacketPtr rs = make_packet(PacketKind::Resend, p->src, 0);
        rs->rpc_id = p->rpc_id;
        rs->dir = MsgDir::Request;
        rs->offset = 0;
        rs->length = static_cast<std::int32_t>(cfg_.rtt_bytes);
        ++counters_.resends_sent;
        send_control(rs);
      }
    }
    return;
  }

  SenderMsg& msg = it->second;
  // Busy when a shorter message holds the sender; the RESEND will be honored
  // once this message is back at the head.
  if (!xmit_index_.empty()) {
    const auto& head = *xmit_index_.begin();
    if (std::get<2>(head) != msg.rpc_id && std::get<0>(head) < msg.remaining()) {
      PacketPtr busy = make_packet(PacketKind::Busy, p->src, 0);
      busy->rpc_id = p->rpc_id;
      busy->dir = p->dir;
      ++counters_.busies_sent;
      send_control(busy);
      return;
    }
  }

  const std::int64_t lo = std::clamp<std::int64_t>(p->offset, 0, msg.length);
  const std::int64_t hi =
      std::clamp<std::int64_t>(p->offset + p->length, lo, msg.length);
  if (hi <= lo) return;
  index_remove(msg);
  // Anything the receiver asks for is implicitly granted.
  msg.granted = std::max(msg.granted, hi);
  const std::int64_t retx_hi = std::min(hi, msg.next_offset);
  if (retx_hi > lo) msg.retx_ranges.emplace_back(lo, retx_hi);
  index_add(msg);
  if (msg.dir == MsgDir::Request && msg.response_length == kNoResponse &&
      msg.next_offset >= msg.length) {
    arm_oneway_gc(msg);  // extend the linger while recovery is active
  }
  pump();
}

// ---------------------------------------------------------------- receiver

void HostTransport::rx_on_data(const PacketPtr& p) {
  auto it = inbound_.find(p->rpc_id);
  if (it == inbound_.end()) {
    // Unknown RPC: create state whether this is the first packet or a
    // mid-message packet, every DATA carries the message length.
    ReceiverMsg msg;
    msg.rpc_id = p->rpc_id;
    msg.src = p->src;
    msg.dir = p->dir;
    msg.length = p->message_length;
    msg.unsched_bytes = p->unsched_bytes;
    msg.granted = std::min<std::int64_t>(p->unsched_bytes, p->message_length);
    msg.arrival_seq = next_arrival_seq_++;
    msg.submitted_at = p->submitted_at;
    msg.incast_flag = p->incast_flag;
    msg.response_length = p->response_length;
    if (cfg_.verify_payload) msg.payload.assign(msg.length, 0);
    it = inbound_.emplace(p->rpc_id, std::move(msg)).first;
    if (estimator_) estimator_->observe(p->message_length);
    if (p->dir == MsgDir::Response) {
      auto rit = rpcs_.find(p->rpc_id);
      if (rit != rpcs_.end() && !rit->second.response_started) {
        rit->second.response_started = true;
        ev_.cancel(rit->second.response_timer);
      }
    }
  }
  ReceiverMsg& msg = it->second;
  rx_arm_timer(msg);

  if (p->retransmit) msg.retx_bytes += p->length;
  ++msg.data_packets;
  msg.preempt_wait += p->preempt_wait;
  msg.queue_wait += p->queue_wait;

  // Collate by offset; duplicates contribute nothing.
  if (p->length > 0) {
    std::int64_t lo = p->offset;
    std::int64_t hi = p->offset + p->length;
    if (cfg_.verify_payload && !p->payload.empty()) {
      std::copy(p->payload.begin(), p->payload.end(),
                msg.payload.begin() + lo);
    }
    auto next = msg.ranges.upper_bound(lo);
    if (next != msg.ranges.begin()) {
      auto prev = std::prev(next);
      if (prev->second >= lo) {
        lo = prev->first;
        hi = std::max(hi, prev->second);
        next = msg.ranges.erase(prev);
      }
    }
    while (next != msg.ranges.end() && next->first <= hi) {
      hi = std::max(hi, next->second);
      next = msg.ranges.erase(next);
    }
    msg.ranges.emplace(lo, hi);
    std::int64_t covered = 0;
    for (const auto& [s, e] : msg.ranges) covered += e - s;
    msg.bytes_received = covered;
  }

  rx_update_active_set();
  auto again = inbound_.find(p->rpc_id);
  if (again == inbound_.end()) return;
  ReceiverMsg& m = again->second;
  if (m.active && m.needs_grants()) {
    rx_maybe_grant(m);
    if (!m.needs_grants()) rx_update_active_set();  // freed a slot
  }
  if (m.bytes_received >= m.length) rx_complete(m);
}

void HostTransport::rx_update_active_set() {
  const PriorityAllocation& own =
      estimator_ ? estimator_->current() : static_alloc_;
  const std::int32_t K = cfg_.effective_overcommit(own.sched_levels);

  for (;;) {
    std::vector<ReceiverMsg*> cand;
    for (auto& [id, msg] : inbound_) {
      if (msg.needs_grants()) cand.push_back(&msg);
    }
    std::sort(cand.begin(), cand.end(), [](const ReceiverMsg* a, const ReceiverMsg* b) {
      if (a->remaining() != b->remaining()) return a->remaining() < b->remaining();
      if (a->arrival_seq != b->arrival_seq) return a->arrival_seq < b->arrival_seq;
      return a->rpc_id < b->rpc_id;
    });

    const auto m = static_cast<std::int32_t>(
        std::min<std::size_t>(cand.size(), static_cast<std::size_t>(K)));
    const std::int32_t usable = std::max(own.sched_levels, 1);
    const std::int32_t occupied = std::min(m, usable);
    std::vector<ReceiverMsg*> newly;
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(cand.size()); ++i) {
      ReceiverMsg* msg = cand[i];
      if (i < m) {
        // Lowest levels first, fewest-remaining on the highest occupied one;
        // past sched_levels (unlimited overcommitment) extras share level 0.
        std::int32_t level = std::max(occupied - 1 - i, 0);
        if (cfg_.forced_sched_level >= 0) level = cfg_.forced_sched_level;
        if (!msg->active) newly.push_back(msg);
        msg->active = true;
        msg->level = level;
      } else {
        msg->active = false;
      }
    }

    const std::int32_t denied = static_cast<std::int32_t>(cand.size()) - m;
    if ((denied > 0) != (denied_count_ > 0) && hooks_.denied) {
      hooks_.denied->on_denied_change(id_, denied > 0);
    }
    denied_count_ = denied;

    if (cfg_.check_invariants && hooks_.invariants &&
        cfg_.forced_sched_level < 0) {
      if (m > K) hooks_.invariants->fail("overcommit bound exceeded");
      if (m <= own.sched_levels) {
        std::vector<bool> used(static_cast<std::size_t>(occupied), false);
        bool ok = true;
        for (std::int32_t i = 0; i < m; ++i) {
          const std::int32_t lv = cand[i]->level;
          if (lv < 0 || lv >= occupied || used[lv]) { ok = false; break; }
          used[lv] = true;
        }
        if (!ok) {
          hooks_.invariants->fail("scheduled levels not a distinct low prefix");
        }
      }
    }

    bool cascaded = false;
    for (ReceiverMsg* msg : newly) {
      rx_maybe_grant(*msg);
      if (!msg->needs_grants()) cascaded = true;  // fully granted on arrival
    }
    if (!cascaded) break;
  }
}

void HostTransport::rx_maybe_grant(ReceiverMsg& msg) {
  if (!msg.active || !msg.needs_grants()) return;
  const std::int64_t new_limit =
      std::min(msg.length, msg.bytes_received + cfg_.rtt_bytes);
  if (new_limit <= msg.granted) return;
  if (cfg_.check_invariants && hooks_.invariants &&
      new_limit - msg.bytes_received > cfg_.rtt_bytes) {
    hooks_.invariants->fail("grant window exceeds RTTbytes");
  }
  msg.granted = new_limit;
  PacketPtr g = make_packet(PacketKind::Grant, msg.src, 0);
  g->rpc_id = msg.rpc_id;
  g->dir = msg.dir;
  g->offset = new_limit;
  g->granted_priority = static_cast<std::uint8_t>(msg.level);
  ++counters_.grants_sent;
  send_control(g);
}

void HostTransport::rx_arm_timer(ReceiverMsg& msg) {
  ev_.cancel(msg.timer);
  const std::uint64_t rpc_id = msg.rpc_id;
  msg.timer =
      ev_.schedule_in(cfg_.resend_timeout, [this, rpc_id] { rx_on_timer(rpc_id); });
}

void HostTransport::rx_on_timer(std::uint64_t rpc_id) {
  auto it = inbound_.find(rpc_id);
  if (it == inbound_.end()) return;
  ReceiverMsg& msg = it->second;

  // First missing contiguous range below the granted limit.
  std::int64_t gap_lo = 0;
  std::int64_t gap_hi = msg.granted;
  if (!msg.ranges.empty() && msg.ranges.begin()->first == 0) {
    gap_lo = msg.ranges.begin()->second;
    auto second = std::next(msg.ranges.begin());
    gap_hi = second != msg.ranges.end()
                 ? std::min(second->first, msg.granted)
                 : msg.granted;
  } else if (!msg.ranges.empty()) {
    gap_hi = std::min(msg.ranges.begin()->first, msg.granted);
  }

  if (gap_hi > gap_lo) {
    ++msg.retries;
    if (msg.retries > cfg_.max_resend_retries) {
      rx_abort(msg);
      return;
    }
    PacketPtr rs = make_packet(PacketKind::Resend, msg.src, 0);
    rs->rpc_id = msg.rpc_id;
    rs->dir = msg.dir;
    rs->offset = gap_lo;
    rs->length = static_cast<std::int32_t>(gap_hi - gap_lo);
    ++counters_.resends_sent;
    send_control(rs);
  }
  // Nothing missing (e.g. inactive by overcommitment): just keep watching.
  rx_arm_timer(msg);
}

void HostTransport::rx_on_busy(const PacketPtr& p) {
  auto it = inbound_.find(p->rpc_id);
  if (it != inbound_.end()) {
    rx_arm_timer(it->second);
    return;
  }
  auto rit = rpcs_.find(p->rpc_id);
  if (rit != rpcs_.end() && !rit->second.response_started) {
    rx_rearm_rpc_timer(rit->second);
  }
}

void HostTransport::rx_rearm_rpc_timer(ClientRpc& rpc) {
  ev_.cancel(rpc.response_timer);
  const std::uint64_t rpc_id = rpc.rpc_id;
  rpc.response_timer = ev_.schedule_in(cfg_.resend_timeout, [this, rpc_id] {
    auto it = rpcs_.find(rpc_id);
    if (it != rpcs_.end()) rx_rpc_timer_body(it->second);
  });
}

void HostTransport::rx_rpc_timer_body(ClientRpc& rpc) {
  if (rpc.response_started) return;
  ++rpc.retries;
  if (rpc.retries > cfg_.max_resend_retries) {
    finish_rpc(rpc.rpc_id, true, ev_.now());
    return;
  }
  PacketPtr rs = make_packet(PacketKind::Resend, rpc.server, 0);
  rs->rpc_id = rpc.rpc_id;
  rs->dir = MsgDir::Response;
  rs->offset = 0;
  rs->length = static_cast<std::int32_t>(
      std::min<std::int64_t>(rpc.response_length, cfg_.rtt_bytes));
  ++counters_.resends_sent;
  send_control(rs);
  rx_rearm_rpc_timer(rpc);
}

void HostTransport::rx_verify_payload(const ReceiverMsg& msg) {
  if (!cfg_.verify_payload) return;
  for (std::int64_t i = 0; i < msg.length; ++i) {
    if (msg.payload[i] != payload_byte(msg.rpc_id, i)) {
      if (hooks_.metrics) hooks_.metrics->on_payload_mismatch(msg.rpc_id);
      return;
    }
  }
}

void HostTransport::rx_complete(ReceiverMsg& msg) {
  ev_.cancel(msg.timer);
  rx_verify_payload(msg);

  if (msg.dir == MsgDir::Request && msg.response_length == kNoResponse) {
    // One-way message: record the completion at the receiver.
    CompletionRecord rec;
    rec.rpc_id = msg.rpc_id;
    rec.size = msg.length;
    rec.submit_time = msg.submitted_at;
    rec.finish_time = ev_.now();
    rec.retransmitted_bytes = msg.retx_bytes;
    rec.preempt_wait = msg.preempt_wait;
    rec.queue_wait = msg.queue_wait;
    rec.data_packets = msg.data_packets;
    ++counters_.completions;
    if (hooks_.metrics) hooks_.metrics->on_completion(rec);
    inbound_.erase(msg.rpc_id);
    return;
  }
  if (msg.dir == MsgDir::Request) {
    // Server: execute (echo) and respond. The request state stays until the
    // last response packet leaves, so duplicate request packets are benign.
    const HostId client = msg.src;
    const std::int64_t resp = msg.response_length;
    const bool flagged = msg.incast_flag;
    submit_message(client, resp, MsgDir::Response, kNoResponse, flagged);
    // submit_message may invalidate msg via pump-side effects only for
    // outbound state; inbound stays. Keep state until response fully sent.
    return;
  }
  // Client: response complete.
  const std::uint64_t rpc_id = msg.rpc_id;
  finish_rpc(rpc_id, false, ev_.now());
}

void HostTransport::rx_abort(ReceiverMsg& msg) {
  ev_.cancel(msg.timer);
  ++counters_.aborts;
  const std::uint64_t rpc_id = msg.rpc_id;
  if (msg.dir == MsgDir::Request && msg.response_length == kNoResponse) {
    CompletionRecord rec;
    rec.rpc_id = rpc_id;
    rec.size = msg.length;
    rec.submit_time = msg.submitted_at;
    rec.finish_time = ev_.now();
    rec.retransmitted_bytes = msg.retx_bytes;
    rec.aborted = true;
    if (hooks_.metrics) hooks_.metrics->on_completion(rec);
    inbound_.erase(rpc_id);
    rx_update_active_set();
    return;
  }
  if (msg.dir == MsgDir::Request) {
    // Server gives up on a half-received request.
    inbound_.erase(rpc_id);
    rx_update_active_set();
    return;
  }
  inbound_.erase(rpc_id);
  rx_update_active_set();
  finish_rpc(rpc_id, true, ev_.now());
}

void HostTransport::finish_rpc(std::uint64_t rpc_id, bool aborted, SimTime finish) {
  auto it = rpcs_.find(rpc_id);
  if (it == rpcs_.end()) return;
  ClientRpc& rpc = it->second;
  ev_.cancel(rpc.response_timer);

  CompletionRecord rec;
  rec.rpc_id = rpc_id;
  rec.size = rpc.response_length;
  rec.submit_time = rpc.issued_at;
  rec.finish_time = finish;
  rec.aborted = aborted;
  auto in = inbound_.find(rpc_id);
  if (in != inbound_.end()) {
    rec.retransmitted_bytes = in->second.retx_bytes;
    ev_.cancel(in->second.timer);
    inbound_.erase(in);
    rx_update_active_set();
  }
  if (aborted) ++counters_.aborts; else ++counters_.completions;
  if (hooks_.metrics) hooks_.metrics->on_completion(rec);

  auto out = outbound_.find(rpc_id);
  if (out != outbound_.end()) {
    index_remove(out->second);
    ev_.cancel(out->second.gc_timer);
    outbound_.erase(out);
  }
  --outstanding_rpcs_;
  rpcs_.erase(it);
}

void HostTransport::debug_discard_server_rpc(std::uint64_t rpc_id) {
  auto in = inbound_.find(rpc_id);
  if (in != inbound_.end() && in->second.dir == MsgDir::Request) {
    ev_.cancel(in->second.timer);
    inbound_.erase(in);
    rx_update_active_set();
  }
  auto out = outbound_.find(rpc_id);
  if (out != outbound_.end() && out->second.dir == MsgDir::Response) {
    index_remove(out->second);
    outbound_.erase(out);
  }
}

// ------------------------------------------------------------------ plumbing

void HostTransport::on_deliver(const PacketPtr& p) {
  if (hooks_.trace) hooks_.trace->on_event(ev_.now(), "rx", id_, *p);
  if (p->cutoffs) {
    const CutoffUpdate& u = *p->cutoffs;
    auto& ver = learned_version_[p->src];
    if (u.version > ver || learned_alloc_.count(p->src) == 0) {
      ver = u.version;
      PriorityAllocation a;
      a.total_levels = cfg_.total_levels;
      a.unsched_levels = u.unsched_levels;
      a.sched_levels = cfg_.total_levels - u.unsched_levels;
      a.cutoffs = u.cutoffs;
      a.unsched_limit = default_unsched_;
      learned_alloc_[p->src] = std::move(a);
    }
  }
  switch (p->kind) {
    case PacketKind::Data:
      rx_on_data(p);
      break;
    case PacketKind::Grant:
      sx_on_grant(p);
      break;
    case PacketKind::Resend:
      sx_on_resend(p);
      break;
    case PacketKind::Busy:
      rx_on_busy(p);
      break;
  }
}

PacketPtr HostTransport::make_packet(PacketKind kind, HostId dst,
                                     std::int32_t payload_len) {
  auto p = std::make_shared<Packet>();
  p->kind = kind;
  p->src = id_;
  p->dst = dst;
  p->wire_bytes = net_.wire().wire_bytes(payload_len);
  if (kind != PacketKind::Data) {
    p->logical_priority = kControlPriority;
    p->wire_priority =
        static_cast<std::uint8_t>(cfg_.wire_priority_of(kControlPriority));
  }
  attach_cutoffs(*p);
  return p;
}

void HostTransport::attach_cutoffs(Packet& p) {
  if (!estimator_ || estimator_->version() == 0) return;
  auto& sent = sent_version_[p.dst];
  if (sent == estimator_->version()) return;
  sent = estimator_->version();
  const PriorityAllocation& cur = estimator_->current();
  CutoffUpdate u;
  u.version = estimator_->version();
  u.unsched_levels = cur.unsched_levels;
  u.cutoffs = cur.cutoffs;
  p.cutoffs = std::move(u);
  p.wire_bytes += cfg_.piggyback_wire_bytes;
}

}  // namespace homa
