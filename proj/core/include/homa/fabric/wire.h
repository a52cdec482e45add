#pragma once

#include <cstdint>

#include "homa/sim/time.h"

namespace homa {

// Framing model for everything that crosses a link. per_packet_overhead
// covers Ethernet preamble + inter-packet gap (20), Ethernet header/CRC (18),
// IP (20) and the transport header (20); it applies to control packets too.
struct WireModel {
  std::int32_t max_payload = 1460;
  std::int32_t per_packet_overhead = 78;

  std::int32_t wire_bytes(std::int32_t payload) const {
    return per_packet_overhead + payload;
  }
  std::int32_t full_size_wire() const { return wire_bytes(max_payload); }
};

// Link rate in Gbps == bits per nanosecond. Serialization time rounds up to
// the next nanosecond; conservation sums rely on this being the single
// rounding point in the fabric.
struct LinkRate {
  // Stored as bits per microsecond so fractional Gbps stay exact.
  std::int64_t bits_per_us = 0;

  static LinkRate gbps(double g) {
    return LinkRate{static_cast<std::int64_t>(g * 1000.0 + 0.5)};
  }
  double as_gbps() const { return static_cast<double>(bits_per_us) / 1000.0; }

  SimTime serialize_ns(std::int64_t bytes) const {
    const std::int64_t bits = bytes * 8;
    return (bits * 1000 + bits_per_us - 1) / bits_per_us;
  }
};

}  // namespace homa
