#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "homa/sim/time.h"

namespace homa {

using HostId = std::int32_t;

enum class PacketKind : std::uint8_t { Data, Grant, Resend, Busy };

// Which message of an RPC a packet refers to. One-way messages are requests
// that expect no response.
enum class MsgDir : std::uint8_t { Request, Response };

inline constexpr int kNumPriorities = 8;
inline constexpr std::uint8_t kControlPriority = 7;  // all non-DATA packets

// Piggybacked unscheduled-priority cutoffs (online estimation mode). Carried
// as metadata at zero wire cost unless the config charges bytes for it.
struct CutoffUpdate {
  std::uint32_t version = 0;
  std::int32_t unsched_levels = 0;
  std::vector<std::int64_t> cutoffs;
};

struct Packet {
  PacketKind kind = PacketKind::Data;
  HostId src = -1;
  HostId dst = -1;
  std::uint64_t rpc_id = 0;
  MsgDir dir = MsgDir::Request;

  // Priority actually stamped on the wire (possibly collapsed when the run
  // restricts the number of usable levels) and the uncollapsed level the
  // protocol reasoned about.
  std::uint8_t wire_priority = kControlPriority;
  std::uint8_t logical_priority = kControlPriority;

  // DATA: first byte offset of the carried range.
  // GRANT: new granted limit. RESEND: start of the missing range.
  std::int64_t offset = 0;
  // DATA: payload bytes carried. RESEND: length of the missing range.
  std::int32_t length = 0;
  // DATA only: total message length and the sender's unscheduled limit for
  // this message, so a receiver can reconstruct state from any packet.
  std::int64_t message_length = 0;
  std::int32_t unsched_bytes = 0;
  // GRANT only: scheduled priority the sender must use for granted bytes.
  std::uint8_t granted_priority = 0;

  bool incast_flag = false;
  bool retransmit = false;

  // Echo-RPC bookkeeping: requests tell the server how large a response to
  // produce. Submit time rides along so the receiver can build the
  // completion record.
  std::int64_t response_length = 0;
  SimTime submitted_at = 0;

  std::optional<CutoffUpdate> cutoffs;

  // Materialized payload (payload-verification mode only).
  std::vector<std::uint8_t> payload;

  // --- simulator bookkeeping, not wire state ---
  std::int32_t wire_bytes = 0;
  SimTime preempt_wait = 0;  // waited behind a lower-priority packet in flight
  SimTime queue_wait = 0;    // waited behind equal/higher-priority packets
  SimTime hop_arrival = 0;   // transient, current hop
  SimTime hop_preempt = 0;   // transient, current hop
};

using PacketPtr = std::shared_ptr<Packet>;

inline const char* kind_name(PacketKind k) {
  switch (k) {
    case PacketKind::Data: return "DATA";
    case PacketKind::Grant: return "GRANT";
    case PacketKind::Resend: return "RESEND";
    case PacketKind::Busy: return "BUSY";
  }
  return "?";
}

}  // namespace homa
