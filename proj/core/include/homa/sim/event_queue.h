#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "homa/sim/time.h"

namespace homa {

using EventFn = std::function<void()>;

// Opaque handle for cancellation. Default-constructed handles are invalid.
struct EventHandle {
  std::uint64_t seq = 0;
  bool valid() const { return seq != 0; }
};

struct RunStats {
  std::uint64_t dispatched = 0;
  SimTime clock = 0;
};

// Discrete-event queue. Events dispatch in (fire_at, sequence) order, so
// ties resolve FIFO and a run is reproducible regardless of platform.
class EventQueue {
 public:
  SimTime now() const { return clock_; }

  // Schedules fn at fire_at. Throws SimError if fire_at precedes the clock.
  EventHandle schedule(SimTime fire_at, EventFn fn);

  EventHandle schedule_in(SimTime delay, EventFn fn) {
    return schedule(clock_ + delay, std::move(fn));
  }

  // True if the event was pending and has been removed; false if it already
  // fired or was already cancelled.
  bool cancel(EventHandle h);

  // Dispatches all events with fire_at <= limit. The clock ends at the time
  // of the last dispatched event, or at limit when nothing fired.
  RunStats run_until(SimTime limit);

  // Dispatches until the queue is empty or max_events have run.
  // Returns the number dispatched.
  std::uint64_t run_all(std::uint64_t max_events = UINT64_MAX);

  std::size_t pending() const { return live_.size(); }
  std::uint64_t total_dispatched() const { return dispatched_; }

 private:
  struct Node {
    SimTime at;
    std::uint64_t seq;
    mutable EventFn fn;  // moved out at dispatch
  };
  struct Later {
    bool operator()(const Node& a, const Node& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  bool dispatch_one();  // pops one live event and runs it

  SimTime clock_ = 0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<Node, std::vector<Node>, Later> heap_;
  std::unordered_set<std::uint64_t> live_;
};

}  // namespace homa
