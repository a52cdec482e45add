#include <algorithm>
#include <vector>

#include "doctest.h"
#include "homa/sim/error.h"
#include "homa/sim/event_queue.h"
#include "homa/sim/rng.h"

using namespace homa;

TEST_CASE("zero-delay event dispatches without advancing the clock") {
  EventQueue ev;
  int fired = 0;
  ev.schedule(0, [&] { ++fired; });
  ev.run_until(0);
  CHECK(fired == 1);
  CHECK(ev.now() == 0);
}

TEST_CASE("equal fire times dispatch in scheduling order") {
  EventQueue ev;
  std::vector<int> order;
  ev.schedule(100, [&] { order.push_back(1); });
  ev.schedule(100, [&] { order.push_back(2); });
  ev.schedule(100, [&] { order.push_back(3); });
  ev.run_until(100);
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("scheduling in the past fails loudly") {
  EventQueue ev;
  ev.schedule(100, [] {});
  ev.run_until(100);
  CHECK(ev.now() == 100);
  CHECK_THROWS_AS(ev.schedule(50, [] {}), SimError);
}

TEST_CASE("run_until with an empty queue advances the clock to the limit") {
  EventQueue ev;
  const auto stats = ev.run_until(kMillisecond);
  CHECK(stats.dispatched == 0);
  CHECK(ev.now() == kMillisecond);
}

TEST_CASE("run_until stops the clock at the last dispatched event") {
  EventQueue ev;
  int fired = 0;
  ev.schedule(500 * kMicrosecond, [&] { ++fired; });
  const auto stats = ev.run_until(kMillisecond);
  CHECK(fired == 1);
  CHECK(stats.dispatched == 1);
  CHECK(ev.now() == 500 * kMicrosecond);
}

TEST_CASE("events beyond the limit stay pending") {
  EventQueue ev;
  int fired = 0;
  ev.schedule(2 * kMillisecond, [&] { ++fired; });
  ev.run_until(kMillisecond);
  CHECK(fired == 0);
  CHECK(ev.pending() == 1);
  ev.run_until(2 * kMillisecond);
  CHECK(fired == 1);
}

TEST_CASE("cancel semantics") {
  EventQueue ev;
  int fired = 0;
  auto h = ev.schedule(100, [&] { ++fired; });
  CHECK(ev.cancel(h));         // pending -> removed
  CHECK_FALSE(ev.cancel(h));   // already cancelled
  ev.run_until(200);
  CHECK(fired == 0);

  auto h2 = ev.schedule(300, [&] { ++fired; });
  ev.run_until(300);
  CHECK(fired == 1);
  CHECK_FALSE(ev.cancel(h2));  // already fired
}

TEST_CASE("dispatch order is a total order over (fire_at, sequence)") {
  // Randomized insertions, some cancellations, compare against a sorted
  // reference of what should have survived.
  Rng rng(42);
  EventQueue ev;
  struct Ref {
    SimTime at;
    std::uint64_t seq;
  };
  std::vector<Ref> expected;
  std::vector<Ref> got;
  std::vector<EventHandle> handles;
  std::vector<Ref> refs;
  for (int i = 0; i < 2000; ++i) {
    const auto at = static_cast<SimTime>(rng.next_below(500));
    auto h = ev.schedule(at, [&got, at, i] {
      got.push_back(Ref{at, static_cast<std::uint64_t>(i)});
    });
    handles.push_back(h);
    refs.push_back(Ref{at, static_cast<std::uint64_t>(i)});
  }
  std::vector<bool> cancelled(handles.size(), false);
  for (int i = 0; i < 400; ++i) {
    const auto idx = rng.next_below(handles.size());
    if (!cancelled[idx]) {
      CHECK(ev.cancel(handles[idx]));
      cancelled[idx] = true;
    }
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!cancelled[i]) expected.push_back(refs[i]);
  }
  std::stable_sort(expected.begin(), expected.end(),
                   [](const Ref& a, const Ref& b) { return a.at < b.at; });
  ev.run_until(1000);
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].at == expected[i].at);
    CHECK(got[i].seq == expected[i].seq);
  }
}

TEST_CASE("identical schedules dispatch identically") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    EventQueue ev;
    std::vector<std::pair<SimTime, int>> log;
    for (int i = 0; i < 1000; ++i) {
      const auto at = static_cast<SimTime>(rng.next_below(1000));
      ev.schedule(at, [&log, at, i] { log.emplace_back(at, i); });
    }
    ev.run_until(1000);
    return log;
  };
  CHECK(run(7) == run(7));
}
