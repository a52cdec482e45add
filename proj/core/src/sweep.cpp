#include "homa/run/sweep.h"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

#include "homa/sim/error.h"

namespace homa {

namespace {

std::string format_value(double v) {
  char buf[32];
  if (v == static_cast<double>(static_cast<std::int64_t>(v))) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

}  // namespace

std::vector<SweepPoint> run_sweep(const RunConfig& cfg, int jobs,
                                  bool write_files) {
  std::vector<SweepPoint> points;
  const bool swept = cfg.sweep_param != "none";
  const std::vector<double> values = swept ? cfg.sweep_values
                                           : std::vector<double>{0};
  for (double v : values) {
    for (std::uint64_t seed : cfg.seeds) {
      SweepPoint p;
      p.value = v;
      p.seed = seed;
      if (swept) {
        p.label = cfg.sweep_param + "-" + format_value(v) + "_seed-" +
                  std::to_string(seed);
      } else {
        p.label = "seed-" + std::to_string(seed);
      }
      points.push_back(std::move(p));
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size() || failed.load()) return;
      SweepPoint& p = points[i];
      try {
        RunConfig point_cfg = cfg;
        point_cfg.sweep_param = "none";
        point_cfg.sweep_values.clear();
        point_cfg.seeds = {p.seed};
        if (swept) apply_sweep_value(point_cfg, cfg.sweep_param, p.value);
        point_cfg.out_dir = cfg.out_dir + "/" + p.label;
        p.result = run_simulation(point_cfg, p.seed);
        if (write_files) write_outputs(point_cfg.out_dir, point_cfg, p.seed, p.result);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        failed.store(true);
        if (error.empty()) error = p.label + ": " + e.what();
      }
    }
  };

  const int nworkers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> threads;
  threads.reserve(nworkers);
  for (int i = 0; i < nworkers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failed.load()) throw SimError("sweep failed: " + error);
  return points;
}

MaxLoadResult find_max_load(const RunConfig& cfg, std::uint64_t seed,
                            double step) {
  if (step <= 0) throw ConfigError("max-load search: step must be positive");
  MaxLoadResult out;

  auto probe = [&](double load) {
    RunConfig point = cfg;
    point.sweep_param = "none";
    point.load = load;
    const RunResult r = run_simulation(point, seed);
    LoadProbe pr;
    pr.load = load;
    pr.sustainable = r.sustainable();
    pr.delivered_fraction = r.offered_goodput_2nd > 0
                                ? r.delivered_goodput_2nd / r.offered_goodput_2nd
                                : 0;
    pr.waste_avg = r.waste_avg;
    out.probes.push_back(pr);
    return pr.sustainable;
  };

  double lo = 0.0;   // known sustainable (trivially, zero load)
  double hi = 0.99;  // probed below if needed
  if (probe(hi)) {
    out.max_load = hi;
    return out;
  }
  while (hi - lo > step) {
    const double mid = (lo + hi) / 2;
    if (probe(mid)) lo = mid; else hi = mid;
  }
  out.max_load = lo;
  return out;
}

}  // namespace homa
