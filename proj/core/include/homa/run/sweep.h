#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homa/run/run_config.h"
#include "homa/run/simulation.h"

namespace homa {

struct SweepPoint {
  std::string label;  // subdirectory name, e.g. "load-0.8_seed-1"
  double value = 0;
  std::uint64_t seed = 0;
  RunResult result;
};

// Runs every (sweep value x seed) combination, writing per-point output
// directories under cfg.out_dir. Points run in parallel up to `jobs`
// workers; each point is an independent seeded simulation, so the results
// do not depend on scheduling.
std::vector<SweepPoint> run_sweep(const RunConfig& cfg, int jobs = 1,
                                  bool write_files = true);

struct LoadProbe {
  double load = 0;
  bool sustainable = false;
  double delivered_fraction = 0;  // delivered / offered over the 2nd half
  double waste_avg = 0;
};

struct MaxLoadResult {
  double max_load = 0;
  std::vector<LoadProbe> probes;
};

// Highest load for which delivered goodput tracks the offered load within 2%
// and the median queueing delay stays stationary over the second half of the
// run. Binary search over [step, 0.99] down to `step` resolution.
MaxLoadResult find_max_load(const RunConfig& cfg, std::uint64_t seed,
                            double step);

}  // namespace homa
