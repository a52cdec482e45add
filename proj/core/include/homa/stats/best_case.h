#pragma once

#include <cstdint>
#include <map>

#include "homa/fabric/topology.h"
#include "homa/prio/allocation.h"
#include "homa/proto/transport_config.h"

namespace homa {

// Best possible completion time by definition: one message of the given size
// alone on an idle fabric, cross-rack when the topology has more than one
// rack. Each size runs a tiny isolated simulation once and is cached, so the
// number stays consistent with whatever wire model is configured.
class BestCaseOracle {
 public:
  BestCaseOracle(const Topology& topo, const WireModel& wire,
                 const TransportConfig& cfg, const PriorityAllocation& alloc);

  SimTime one_way_ns(std::int64_t size) const;

 private:
  Topology topo_;
  WireModel wire_;
  TransportConfig cfg_;
  PriorityAllocation alloc_;
  mutable std::map<std::int64_t, SimTime> cache_;
};

}  // namespace homa
