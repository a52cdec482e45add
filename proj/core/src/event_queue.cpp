#include "homa/sim/event_queue.h"

#include <string>

#include "homa/sim/error.h"

namespace homa {

EventHandle EventQueue::schedule(SimTime fire_at, EventFn fn) {
  if (fire_at < clock_) {
    throw SimError("schedule: fire_at " + std::to_string(fire_at) +
                   " ns is before the clock at " + std::to_string(clock_) +
                   " ns");
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push(Node{fire_at, seq, std::move(fn)});
  live_.insert(seq);
  return EventHandle{seq};
}

bool EventQueue::cancel(EventHandle h) {
  if (!h.valid()) return false;
  // The heap node stays behind as a tombstone and is skipped on pop.
  return live_.erase(h.seq) == 1;
}

bool EventQueue::dispatch_one() {
  while (!heap_.empty()) {
    const Node& top = heap_.top();
    if (live_.erase(top.seq) == 0) {
      heap_.pop();  // cancelled
      continue;
    }
    clock_ = top.at;
    EventFn fn = std::move(top.fn);
    heap_.pop();
    ++dispatched_;
    fn();
    return true;
  }
  return false;
}

RunStats EventQueue::run_until(SimTime limit) {
  RunStats stats;
  bool fired = false;
  while (!heap_.empty()) {
    // Skip tombstones so the next fire time is real.
    if (live_.count(heap_.top().seq) == 0) {
      heap_.pop();
      continue;
    }
    if (heap_.top().at > limit) break;
    dispatch_one();
    ++stats.dispatched;
    fired = true;
  }
  if (!fired && limit > clock_) clock_ = limit;
  stats.clock = clock_;
  return stats;
}

std::uint64_t EventQueue::run_all(std::uint64_t max_events) {
  std::uint64_t n = 0;
  while (n < max_events && dispatch_one()) ++n;
  return n;
}

}  // namespace homa
