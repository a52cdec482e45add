#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homa/fabric/topology.h"
#include "homa/fabric/wire.h"
#include "homa/load/workload.h"
#include "homa/proto/transport_config.h"

namespace homa {

// One experiment description: plain sectioned text, `#` comments,
// `key = value` lines. Unknown sections or keys are errors so sweep typos
// fail loudly. Defaults reproduce the paper's simulation setup.
struct RunConfig {
  Topology topo;
  WireModel wire;
  TransportConfig transport;

  // [transport] knobs that need resolution before the run
  bool rtt_auto = true;                     // rtt_bytes = derived from topology
  bool cutoffs_manual = false;
  std::vector<std::int64_t> manual_cutoffs;

  // [workload]
  std::string cdf_path;
  double load = 0.8;
  WorkloadMode mode = WorkloadMode::OneWay;
  SimTime duration = 50 * kMillisecond;
  std::int64_t rpc_request = 0;   // 0 = echo the drawn size
  std::int64_t rpc_response = 0;
  std::int32_t fanout = 1;
  SimTime incast_interval = 10 * kMillisecond;

  // [output]
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds{1};
  bool trace = false;
  double warmup_fraction = 0.1;
  bool drain = false;
  SimTime drain_timeout = 500 * kMillisecond;
  std::uint64_t event_cap = 50'000'000;  // pending events; graceful truncation

  // [sweep]
  std::string sweep_param = "none";
  std::vector<double> sweep_values;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// CLI override "section.key=value"; same validation as the file parser.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Applies one sweep value; param must be one of the supported names
// (load, overcommit, priorities, total_priorities, unsched_limit).
void apply_sweep_value(RunConfig& cfg, const std::string& param, double value);

// Applies an ablation variant: priorities=x, overcommit=k,
// overcommit=unlimited, basic, unsched_limit=b, cutoffs=a:b:c.
void apply_ablation(RunConfig& cfg, const std::string& variant);

void validate(const RunConfig& cfg);

// Fully-resolved echo; parsing it back reproduces the run exactly.
std::string echo_config(const RunConfig& cfg, std::uint64_t seed,
                        std::int64_t resolved_rtt_bytes,
                        const std::vector<std::int64_t>& resolved_cutoffs);

}  // namespace homa
