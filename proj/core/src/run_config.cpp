#include "homa/run/run_config.h"

#include <fstream>
#include <sstream>

#include "homa/sim/error.h"

namespace homa {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyContext {
  const std::string& origin;
  int line;
  const std::string& key;
  const std::string& value;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key +
                      "': " + why);
  }
  std::int64_t as_int() const {
    try {
      std::size_t pos = 0;
      const std::int64_t v = std::stoll(value, &pos);
      if (pos != value.size()) fail("expected integer, got '" + value + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("expected integer, got '" + value + "'");
    }
  }
  double as_double() const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (pos != value.size()) fail("expected number, got '" + value + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("expected number, got '" + value + "'");
    }
  }
  bool as_bool() const {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail("expected true/false");
  }
  std::vector<std::int64_t> as_int_list() const {
    std::vector<std::int64_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail("empty list element");
      out.push_back(std::stoll(item));
    }
    if (out.empty()) fail("expected a comma-separated list");
    return out;
  }
  std::vector<double> as_double_list() const {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail("empty list element");
      out.push_back(std::stod(item));
    }
    if (out.empty()) fail("expected a comma-separated list");
    return out;
  }
};

void apply_key(RunConfig& cfg, const std::string& section, const KeyContext& kc) {
  const std::string& key = kc.key;
  if (section == "topology") {
    if (key == "racks") cfg.topo.num_racks = static_cast<std::int32_t>(kc.as_int());
    else if (key == "hosts_per_rack") cfg.topo.hosts_per_rack = static_cast<std::int32_t>(kc.as_int());
    else if (key == "aggr_switches") cfg.topo.num_aggr_switches = static_cast<std::int32_t>(kc.as_int());
    else if (key == "host_link_gbps") cfg.topo.host_link_gbps = kc.as_double();
    else if (key == "core_link_gbps") cfg.topo.core_link_gbps = kc.as_double();
    else if (key == "switch_delay_ns") cfg.topo.switch_delay = kc.as_int();
    else if (key == "sw_turnaround_ns") cfg.topo.sw_turnaround = kc.as_int();
    else if (key == "buffer_limit_bytes") cfg.topo.buffer_limit_bytes = kc.as_int();
    else if (key == "loss_rate") cfg.topo.loss_rate = kc.as_double();
    else if (key == "max_payload") cfg.wire.max_payload = static_cast<std::int32_t>(kc.as_int());
    else if (key == "per_packet_overhead") cfg.wire.per_packet_overhead = static_cast<std::int32_t>(kc.as_int());
    else kc.fail("unknown key in [topology]");
    return;
  }
  if (section == "transport") {
    if (key == "rtt_bytes") {
      if (kc.value == "auto") { cfg.rtt_auto = true; cfg.transport.rtt_bytes = 0; }
      else { cfg.rtt_auto = false; cfg.transport.rtt_bytes = kc.as_int(); }
    }
    else if (key == "total_priorities") cfg.transport.total_levels = static_cast<std::int32_t>(kc.as_int());
    else if (key == "wire_priorities") cfg.transport.wire_levels = static_cast<std::int32_t>(kc.as_int());
    else if (key == "overcommit") {
      if (kc.value == "auto") { cfg.transport.overcommit_degree = 0; cfg.transport.overcommit_unlimited = false; }
      else if (kc.value == "unlimited") { cfg.transport.overcommit_unlimited = true; cfg.transport.overcommit_degree = 0; }
      else { cfg.transport.overcommit_degree = static_cast<std::int32_t>(kc.as_int()); cfg.transport.overcommit_unlimited = false; }
    }
    else if (key == "resend_timeout_ns") cfg.transport.resend_timeout = kc.as_int();
    else if (key == "max_resend_retries") cfg.transport.max_resend_retries = static_cast<std::int32_t>(kc.as_int());
    else if (key == "incast_threshold") cfg.transport.incast_threshold = static_cast<std::int32_t>(kc.as_int());
    else if (key == "incast_unsched_limit") cfg.transport.incast_unsched_limit = static_cast<std::int32_t>(kc.as_int());
    else if (key == "nic_queue_packets") cfg.transport.nic_queue_packets = static_cast<std::int32_t>(kc.as_int());
    else if (key == "unsched_limit") {
      if (kc.value == "auto") cfg.transport.unsched_limit = -1;
      else cfg.transport.unsched_limit = kc.as_int();
    }
    else if (key == "unsched_cutoffs") {
      if (kc.value == "auto") { cfg.cutoffs_manual = false; cfg.manual_cutoffs.clear(); }
      else { cfg.cutoffs_manual = true; cfg.manual_cutoffs = kc.as_int_list(); }
    }
    else if (key == "online_estimation") cfg.transport.online_estimation = kc.as_bool();
    else if (key == "estimator_interval_ns") cfg.transport.estimator_interval = kc.as_int();
    else if (key == "piggyback_wire_bytes") cfg.transport.piggyback_wire_bytes = static_cast<std::int32_t>(kc.as_int());
    else if (key == "verify_payload") cfg.transport.verify_payload = kc.as_bool();
    else if (key == "check_invariants") cfg.transport.check_invariants = kc.as_bool();
    else if (key == "forced_sched_level") cfg.transport.forced_sched_level = static_cast<std::int32_t>(kc.as_int());
    else kc.fail("unknown key in [transport]");
    return;
  }
  if (section == "workload") {
    if (key == "cdf") cfg.cdf_path = kc.value;
    else if (key == "load") cfg.load = kc.as_double();
    else if (key == "mode") {
      if (kc.value == "one-way") cfg.mode = WorkloadMode::OneWay;
      else if (kc.value == "rpc") cfg.mode = WorkloadMode::Rpc;
      else kc.fail("mode must be one-way or rpc");
    }
    else if (key == "duration_ns") cfg.duration = kc.as_int();
    else if (key == "rpc_request") cfg.rpc_request = kc.value == "echo" ? 0 : kc.as_int();
    else if (key == "rpc_response") cfg.rpc_response = kc.value == "echo" ? 0 : kc.as_int();
    else if (key == "fanout") cfg.fanout = static_cast<std::int32_t>(kc.as_int());
    else if (key == "incast_interval_ns") cfg.incast_interval = kc.as_int();
    else kc.fail("unknown key in [workload]");
    return;
  }
  if (section == "output") {
    if (key == "dir") cfg.out_dir = kc.value;
    else if (key == "seeds") {
      cfg.seeds.clear();
      for (std::int64_t s : kc.as_int_list()) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    else if (key == "trace") cfg.trace = kc.as_bool();
    else if (key == "warmup_fraction") cfg.warmup_fraction = kc.as_double();
    else if (key == "drain") cfg.drain = kc.as_bool();
    else if (key == "drain_timeout_ns") cfg.drain_timeout = kc.as_int();
    else if (key == "event_cap") cfg.event_cap = static_cast<std::uint64_t>(kc.as_int());
    else kc.fail("unknown key in [output]");
    return;
  }
  if (section == "sweep") {
    if (key == "parameter") cfg.sweep_param = kc.value;
    else if (key == "values") cfg.sweep_values = kc.as_double_list();
    else kc.fail("unknown key in [sweep]");
    return;
  }
  kc.fail("unknown section [" + section + "]");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": key outside any [section]");
    }
    KeyContext kc{origin, lineno, key, value};
    apply_key(cfg, section, kc);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value: " + assignment);
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string value = assignment.substr(eq + 1);
  KeyContext kc{assignment, 0, key, value};
  apply_key(cfg, section, kc);
}

void apply_sweep_value(RunConfig& cfg, const std::string& param, double value) {
  if (param == "load") {
    cfg.load = value;
  } else if (param == "overcommit") {
    if (value <= 0) {
      cfg.transport.overcommit_unlimited = true;
      cfg.transport.overcommit_degree = 0;
    } else {
      cfg.transport.overcommit_unlimited = false;
      cfg.transport.overcommit_degree = static_cast<std::int32_t>(value);
    }
  } else if (param == "priorities") {
    cfg.transport.wire_levels = static_cast<std::int32_t>(value);
  } else if (param == "total_priorities") {
    cfg.transport.total_levels = static_cast<std::int32_t>(value);
  } else if (param == "unsched_limit") {
    cfg.transport.unsched_limit = static_cast<std::int64_t>(value);
  } else if (param != "none") {
    throw ConfigError("unknown sweep parameter: " + param);
  }
}

void apply_ablation(RunConfig& cfg, const std::string& variant) {
  if (variant == "basic") {
    // Receiver grants to everyone on a single wire priority.
    cfg.transport.overcommit_unlimited = true;
    cfg.transport.wire_levels = 1;
    return;
  }
  const auto eq = variant.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("ablation variant must be name=value or 'basic': " + variant);
  }
  const std::string name = variant.substr(0, eq);
  const std::string value = variant.substr(eq + 1);
  if (name == "priorities") {
    cfg.transport.wire_levels = std::stoi(value);
  } else if (name == "overcommit") {
    if (value == "unlimited") {
      cfg.transport.overcommit_unlimited = true;
      cfg.transport.overcommit_degree = 0;
    } else {
      cfg.transport.overcommit_unlimited = false;
      cfg.transport.overcommit_degree = std::stoi(value);
    }
  } else if (name == "unsched_limit") {
    cfg.transport.unsched_limit = std::stoll(value);
  } else if (name == "cutoffs") {
    cfg.cutoffs_manual = true;
    cfg.manual_cutoffs.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ':')) cfg.manual_cutoffs.push_back(std::stoll(item));
    if (cfg.manual_cutoffs.empty()) throw ConfigError("cutoffs ablation: empty list");
  } else {
    throw ConfigError("unknown ablation variant: " + name);
  }
}

void validate(const RunConfig& cfg) {
  auto want = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  want(cfg.topo.num_racks >= 1, "racks must be >= 1");
  want(cfg.topo.hosts_per_rack >= 1, "hosts_per_rack must be >= 1");
  want(cfg.topo.num_hosts() >= 2, "need at least 2 hosts");
  want(cfg.topo.num_racks == 1 || cfg.topo.num_aggr_switches >= 1,
       "aggr_switches must be >= 1 for multi-rack topologies");
  want(cfg.topo.host_link_gbps > 0 && cfg.topo.core_link_gbps > 0,
       "link rates must be positive");
  want(cfg.topo.switch_delay >= 0 && cfg.topo.sw_turnaround >= 0,
       "delays must be nonnegative");
  want(cfg.topo.buffer_limit_bytes > 0, "buffer_limit_bytes must be positive");
  want(cfg.topo.loss_rate >= 0 && cfg.topo.loss_rate <= 1,
       "loss_rate must be in [0, 1]");
  want(cfg.wire.max_payload > 0, "max_payload must be positive");
  want(cfg.wire.per_packet_overhead >= 0, "per_packet_overhead must be >= 0");
  want(cfg.transport.total_levels >= 1 &&
           cfg.transport.total_levels <= kNumPriorities,
       "total_priorities must be in 1..8");
  want(cfg.transport.wire_levels >= 1 &&
           cfg.transport.wire_levels <= kNumPriorities,
       "wire_priorities must be in 1..8");
  want(cfg.transport.resend_timeout > 0, "resend_timeout_ns must be positive");
  want(cfg.transport.max_resend_retries >= 0, "max_resend_retries must be >= 0");
  want(cfg.transport.nic_queue_packets >= 1, "nic_queue_packets must be >= 1");
  want(cfg.load >= 0 && cfg.load < 1, "load must be in [0, 1)");
  want(cfg.duration > 0, "duration_ns must be positive");
  want(!cfg.cdf_path.empty(), "workload cdf path is required");
  want(cfg.fanout >= 1, "fanout must be >= 1");
  want(!cfg.seeds.empty(), "need at least one seed");
  want(cfg.warmup_fraction >= 0 && cfg.warmup_fraction < 1,
       "warmup_fraction must be in [0, 1)");
  if (cfg.sweep_param != "none") {
    want(!cfg.sweep_values.empty(), "sweep values required when parameter set");
  }
}

std::string echo_config(const RunConfig& cfg, std::uint64_t seed,
                        std::int64_t resolved_rtt_bytes,
                        const std::vector<std::int64_t>& resolved_cutoffs) {
  std::ostringstream o;
  o.precision(17);  // doubles must survive the round trip exactly
  o << "# resolved run configuration; re-running this file reproduces the run\n";
  o << "[topology]\n";
  o << "racks = " << cfg.topo.num_racks << "\n";
  o << "hosts_per_rack = " << cfg.topo.hosts_per_rack << "\n";
  o << "aggr_switches = " << cfg.topo.num_aggr_switches << "\n";
  o << "host_link_gbps = " << cfg.topo.host_link_gbps << "\n";
  o << "core_link_gbps = " << cfg.topo.core_link_gbps << "\n";
  o << "switch_delay_ns = " << cfg.topo.switch_delay << "\n";
  o << "sw_turnaround_ns = " << cfg.topo.sw_turnaround << "\n";
  o << "buffer_limit_bytes = " << cfg.topo.buffer_limit_bytes << "\n";
  o << "loss_rate = " << cfg.topo.loss_rate << "\n";
  o << "max_payload = " << cfg.wire.max_payload << "\n";
  o << "per_packet_overhead = " << cfg.wire.per_packet_overhead << "\n";
  o << "\n[transport]\n";
  o << "rtt_bytes = " << resolved_rtt_bytes << "\n";
  o << "total_priorities = " << cfg.transport.total_levels << "\n";
  o << "wire_priorities = " << cfg.transport.wire_levels << "\n";
  if (cfg.transport.overcommit_unlimited) o << "overcommit = unlimited\n";
  else if (cfg.transport.overcommit_degree > 0) o << "overcommit = " << cfg.transport.overcommit_degree << "\n";
  else o << "overcommit = auto\n";
  o << "resend_timeout_ns = " << cfg.transport.resend_timeout << "\n";
  o << "max_resend_retries = " << cfg.transport.max_resend_retries << "\n";
  o << "incast_threshold = " << cfg.transport.incast_threshold << "\n";
  o << "incast_unsched_limit = " << cfg.transport.incast_unsched_limit << "\n";
  o << "nic_queue_packets = " << cfg.transport.nic_queue_packets << "\n";
  o << "unsched_limit = " << cfg.transport.unsched_limit << "\n";
  if (cfg.cutoffs_manual) {
    o << "unsched_cutoffs = ";
    for (std::size_t i = 0; i < cfg.manual_cutoffs.size(); ++i) {
      o << (i ? "," : "") << cfg.manual_cutoffs[i];
    }
    o << "\n";
  } else {
    o << "unsched_cutoffs = auto  # resolved:";
    for (std::int64_t c : resolved_cutoffs) o << ' ' << c;
    o << "\n";
  }
  o << "online_estimation = " << (cfg.transport.online_estimation ? "true" : "false") << "\n";
  o << "estimator_interval_ns = " << cfg.transport.estimator_interval << "\n";
  o << "piggyback_wire_bytes = " << cfg.transport.piggyback_wire_bytes << "\n";
  o << "verify_payload = " << (cfg.transport.verify_payload ? "true" : "false") << "\n";
  o << "check_invariants = " << (cfg.transport.check_invariants ? "true" : "false") << "\n";
  o << "forced_sched_level = " << cfg.transport.forced_sched_level << "\n";
  o << "\n[workload]\n";
  o << "cdf = " << cfg.cdf_path << "\n";
  o << "load = " << cfg.load << "\n";
  o << "mode = " << (cfg.mode == WorkloadMode::OneWay ? "one-way" : "rpc") << "\n";
  o << "duration_ns = " << cfg.duration << "\n";
  o << "rpc_request = " << (cfg.rpc_request > 0 ? std::to_string(cfg.rpc_request) : "echo") << "\n";
  o << "rpc_response = " << (cfg.rpc_response > 0 ? std::to_string(cfg.rpc_response) : "echo") << "\n";
  o << "fanout = " << cfg.fanout << "\n";
  o << "incast_interval_ns = " << cfg.incast_interval << "\n";
  o << "\n[output]\n";
  o << "dir = " << cfg.out_dir << "\n";
  o << "seeds = " << seed << "\n";
  o << "trace = " << (cfg.trace ? "true" : "false") << "\n";
  o << "warmup_fraction = " << cfg.warmup_fraction << "\n";
  o << "drain = " << (cfg.drain ? "true" : "false") << "\n";
  o << "drain_timeout_ns = " << cfg.drain_timeout << "\n";
  o << "event_cap = " << cfg.event_cap << "\n";
  return o.str();
}

}  // namespace homa
