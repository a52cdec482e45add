#include "homa/run/simulation.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "homa/load/workload.h"
#include "homa/proto/transport.h"
#include "homa/sim/error.h"
#include "homa/stats/best_case.h"

namespace homa {

bool RunResult::sustainable() const {
  if (truncated) return false;
  if (offered_goodput_2nd <= 0) return false;
  if (delivered_goodput_2nd < 0.98 * offered_goodput_2nd) return false;
  if (median_wait_q3 < 0 || median_wait_q4 < 0) return false;
  // Stationarity: the 4th-quarter median must not run away from the 3rd.
  const double bound = std::max(median_wait_q3 * 1.3, median_wait_q3 + 2000.0);
  return median_wait_q4 <= bound;
}

RunResult run_simulation(const RunConfig& cfg_in, std::uint64_t seed) {
  RunConfig cfg = cfg_in;
  validate(cfg);

  RunResult result;
  result.duration = cfg.duration;

  // Resolve transport parameters that derive from the topology/workload.
  if (cfg.transport.rtt_bytes <= 0) {
    cfg.transport.rtt_bytes = estimate_rtt_bytes(cfg.topo, cfg.wire);
  }
  result.resolved_rtt_bytes = cfg.transport.rtt_bytes;

  SizeDistribution cdf = SizeDistribution::from_file(cfg.cdf_path);
  const std::int64_t alloc_limit =
      cfg.transport.unsched_limit >= 0
          ? std::max<std::int64_t>(cfg.transport.unsched_limit, 1)
          : cfg.transport.rtt_bytes;
  PriorityAllocation alloc;
  if (cfg.cutoffs_manual) {
    alloc = allocation_from_cutoffs(cfg.manual_cutoffs, alloc_limit,
                                    cfg.transport.total_levels);
  } else if (cfg.transport.total_levels < 2) {
    // Single level: everything shares priority 0.
    alloc.total_levels = 1;
    alloc.unsched_levels = 1;
    alloc.sched_levels = 0;
    alloc.unsched_limit = alloc_limit;
  } else {
    alloc = allocate_priorities(cdf, alloc_limit, cfg.transport.total_levels);
  }
  result.resolved_cutoffs = alloc.cutoffs;
  result.allocation = alloc;

  EventQueue ev;
  Network net(ev, cfg.topo, cfg.wire, seed);
  MetricsCollector metrics;
  InvariantChecker invariants;
  WasteMonitor waste(ev, cfg.topo.num_hosts());
  std::unique_ptr<FileTrace> trace;
  if (cfg.trace) {
    std::filesystem::create_directories(cfg.out_dir);
    trace = std::make_unique<FileTrace>(cfg.out_dir + "/trace.log");
  }

  TransportHooks hooks;
  hooks.metrics = &metrics;
  hooks.invariants = &invariants;
  hooks.denied = &waste;
  hooks.trace = trace.get();

  for (HostId h = 0; h < cfg.topo.num_hosts(); ++h) {
    net.tor_downlink(h).set_on_idle_change(
        [&waste, h](bool idle) { waste.on_downlink_idle(h, idle); });
  }

  std::vector<std::unique_ptr<HostTransport>> hosts;
  hosts.reserve(cfg.topo.num_hosts());
  for (HostId h = 0; h < cfg.topo.num_hosts(); ++h) {
    hosts.push_back(std::make_unique<HostTransport>(h, ev, net, cfg.transport,
                                                    alloc, hooks));
    hosts.back()->set_horizon(cfg.duration);
  }

  WorkloadSpec spec;
  spec.cdf = cdf;
  spec.target_load = cfg.load;
  spec.mode = cfg.mode;
  spec.duration = cfg.duration;
  spec.rpc_request = cfg.rpc_request;
  spec.rpc_response = cfg.rpc_response;
  spec.fanout = cfg.fanout;
  spec.incast_interval = cfg.incast_interval;
  const std::int64_t unsched_limit = cfg.transport.unsched_limit >= 0
                                         ? cfg.transport.unsched_limit
                                         : cfg.transport.rtt_bytes;
  WorkloadGenerator gen(ev, spec, cfg.topo, cfg.wire, unsched_limit, hosts, seed);

  // Quarter samples for load tracking and delay stationarity.
  std::vector<double> wait_q3, wait_q4;
  const SimTime t_half = cfg.duration / 2;
  const SimTime t_q3 = cfg.duration * 3 / 4;
  net.set_delivery_stats([&](const Packet& p, SimTime now) {
    if (p.kind != PacketKind::Data) return;
    const auto w = static_cast<double>(p.preempt_wait + p.queue_wait);
    if (now >= t_half && now < t_q3) wait_q3.push_back(w);
    else if (now >= t_q3 && now <= cfg.duration) wait_q4.push_back(w);
  });
  std::int64_t goodput_at_half = 0;
  ev.schedule(t_half, [&] { goodput_at_half = net.counters().goodput_bytes_delivered; });

  gen.start();

  // Run in slices so runaway backlogs truncate gracefully instead of
  // exhausting memory (open-loop overload grows the queue without bound).
  const SimTime slice = std::max<SimTime>(cfg.duration / 100, 1);
  SimTime t = 0;
  while (t < cfg.duration) {
    t = std::min(t + slice, cfg.duration);
    ev.run_until(t);
    if (ev.pending() > cfg.event_cap) {
      result.truncated = true;
      break;
    }
  }
  if (!result.truncated && cfg.drain) {
    ev.run_until(cfg.duration + cfg.drain_timeout);
  }
  result.events = ev.total_dispatched();

  // ---- reports ----
  const SimTime duration = cfg.duration;
  result.completions = metrics.records();
  result.completed = metrics.completed();
  result.aborted = metrics.aborted();
  result.payload_mismatches = metrics.payload_mismatches();
  result.flagged_unsched_bytes = metrics.flagged_unsched_bytes();
  result.ports = net.port_reports(duration);
  result.tor_up_agg = net.aggregate_stats(PortKind::TorUplink, duration);
  result.aggr_down_agg = net.aggregate_stats(PortKind::AggrDownlink, duration);
  result.tor_down_agg = net.aggregate_stats(PortKind::TorDownlink, duration);
  result.fabric = net.counters();
  result.waste_avg = waste.average_fraction(duration);
  for (HostId h = 0; h < cfg.topo.num_hosts(); ++h) {
    result.waste_per_host.push_back(waste.fraction_for(h, duration));
  }
  result.prio_bytes = net.downlink_bytes_by_priority();
  result.downlink_capacity_bytes = static_cast<double>(cfg.topo.num_hosts()) *
                                   cfg.topo.host_link_gbps / 8.0 * 1e9 *
                                   (static_cast<double>(duration) / 1e9);
  result.invariant_violations = invariants.violations();
  result.violation_samples = invariants.samples();
  result.messages_submitted = gen.messages_submitted();

  result.offered_goodput_2nd = gen.offered_goodput_bytes(t_half, duration);
  result.delivered_goodput_2nd = static_cast<double>(
      net.counters().goodput_bytes_delivered - goodput_at_half);
  auto median_of = [](std::vector<double>& v) -> double {
    if (v.empty()) return -1;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  result.median_wait_q3 = median_of(wait_q3);
  result.median_wait_q4 = median_of(wait_q4);

  // Spectrum and breakdown over post-warmup records.
  const SimTime warmup =
      static_cast<SimTime>(cfg.warmup_fraction * static_cast<double>(duration));
  std::vector<CompletionRecord> measured;
  for (const auto& r : result.completions) {
    if (r.submit_time >= warmup) measured.push_back(r);
  }
  if (!measured.empty()) {
    BestCaseOracle oracle(cfg.topo, cfg.wire, cfg.transport, alloc);
    auto best = [&oracle](std::int64_t size) { return oracle.one_way_ns(size); };
    result.spectrum = slowdown_spectrum(measured, cdf, best);
    result.breakdown = tail_delay_breakdown(measured, cdf, best);
  }
  return result;
}

void write_outputs(const std::string& dir, const RunConfig& cfg,
                   std::uint64_t seed, const RunResult& result) {
  std::filesystem::create_directories(dir);
  write_completions_csv(dir + "/completions.csv", result.completions);
  write_spectrum_csv(dir + "/spectrum.csv", result.spectrum);
  write_ports_csv(dir + "/ports.csv", result.ports);

  {
    std::ofstream out(dir + "/waste.csv");
    if (!out) throw SimError("cannot write " + dir + "/waste.csv");
    out << "host,idle_denied_fraction\n";
    char buf[64];
    for (std::size_t h = 0; h < result.waste_per_host.size(); ++h) {
      std::snprintf(buf, sizeof(buf), "%.6f", result.waste_per_host[h]);
      out << h << ',' << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.6f", result.waste_avg);
    out << "mean," << buf << '\n';
  }
  write_priousage_csv(dir + "/priousage.csv", result.prio_bytes,
                      result.downlink_capacity_bytes);
  write_breakdown_csv(dir + "/breakdown.csv", result.breakdown);

  std::ofstream echo(dir + "/config.resolved");
  if (!echo) throw SimError("cannot write " + dir + "/config.resolved");
  echo << echo_config(cfg, seed, result.resolved_rtt_bytes,
                      result.resolved_cutoffs);

  if (result.truncated || result.invariant_violations > 0 ||
      result.payload_mismatches > 0) {
    std::ofstream warn(dir + "/warnings.txt");
    if (result.truncated) {
      warn << "truncated: event backlog exceeded the safety cap; offered load "
              "is not sustainable\n";
    }
    if (result.invariant_violations > 0) {
      warn << "invariant violations: " << result.invariant_violations << "\n";
      for (const auto& s : result.violation_samples) warn << "  " << s << "\n";
    }
    if (result.payload_mismatches > 0) {
      warn << "payload mismatches: " << result.payload_mismatches << "\n";
    }
  }
}

}  // namespace homa
