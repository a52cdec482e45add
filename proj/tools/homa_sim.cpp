// Experiment driver: runs single configurations, parameter sweeps, maximum
// sustainable load searches, and degraded-configuration studies. All results
// land as CSV files in per-run output directories.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "homa/run/run_config.h"
#include "homa/run/simulation.h"
#include "homa/run/sweep.h"
#include "homa/sim/error.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> overrides;
  int jobs = 1;
  int verbosity = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "Run configuration file")
      ->required();
  cmd->add_option("-o,--out", args.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", args.seeds, "Seed override (repeatable)");
  cmd->add_option("--set", args.overrides,
                  "Config override, section.key=value (repeatable)");
  cmd->add_option("-j,--jobs", args.jobs, "Parallel sweep workers");
  cmd->add_flag("-v,--verbose", args.verbosity, "More progress output");
}

homa::RunConfig load_config(const CommonArgs& args) {
  homa::RunConfig cfg = homa::parse_config_file(args.config_path);
  for (const auto& ov : args.overrides) homa::apply_override(cfg, ov);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (!args.seeds.empty()) cfg.seeds = args.seeds;
  homa::validate(cfg);
  return cfg;
}

int cmd_run(const CommonArgs& args, const std::string& sweep_override) {
  homa::RunConfig cfg = load_config(args);
  if (!sweep_override.empty()) {
    const auto eq = sweep_override.find('=');
    if (eq == std::string::npos) {
      throw homa::ConfigError("--sweep must look like parameter=v1,v2,...");
    }
    cfg.sweep_param = sweep_override.substr(0, eq);
    cfg.sweep_values.clear();
    std::stringstream ss(sweep_override.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) cfg.sweep_values.push_back(std::stod(item));
    homa::validate(cfg);
  }
  const auto points = homa::run_sweep(cfg, args.jobs, /*write_files=*/true);
  for (const auto& p : points) {
    std::printf("%-32s events=%llu completed=%llu aborted=%llu%s\n",
                p.label.c_str(),
                static_cast<unsigned long long>(p.result.events),
                static_cast<unsigned long long>(p.result.completed),
                static_cast<unsigned long long>(p.result.aborted),
                p.result.truncated ? " TRUNCATED" : "");
    if (args.verbosity > 0) {
      std::printf("  delivered/offered=%.4f waste=%.4f violations=%llu\n",
                  p.result.offered_goodput_2nd > 0
                      ? p.result.delivered_goodput_2nd / p.result.offered_goodput_2nd
                      : 0.0,
                  p.result.waste_avg,
                  static_cast<unsigned long long>(p.result.invariant_violations));
    }
  }
  return 0;
}

int cmd_max_load(const CommonArgs& args, double step) {
  homa::RunConfig cfg = load_config(args);
  const std::uint64_t seed = cfg.seeds.front();
  const auto res = homa::find_max_load(cfg, seed, step);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/max_load.csv";
  std::ofstream out(path);
  out << "load,sustainable,delivered_fraction,waste_avg\n";
  for (const auto& p : res.probes) {
    out << p.load << ',' << (p.sustainable ? 1 : 0) << ','
        << p.delivered_fraction << ',' << p.waste_avg << '\n';
  }
  out << "max," << res.max_load << ",,\n";
  std::printf("max sustainable load: %.3f (%s)\n", res.max_load, path.c_str());
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& variant) {
  homa::RunConfig cfg = load_config(args);
  homa::apply_ablation(cfg, variant);
  // Keep per-variant outputs apart.
  std::string tag = variant;
  for (char& c : tag) {
    if (c == '=' || c == ':' || c == ',') c = '-';
  }
  cfg.out_dir += "/ablate-" + tag;
  const auto points = homa::run_sweep(cfg, args.jobs, /*write_files=*/true);
  for (const auto& p : points) {
    std::printf("%s/%-24s completed=%llu aborted=%llu%s\n", tag.c_str(),
                p.label.c_str(),
                static_cast<unsigned long long>(p.result.completed),
                static_cast<unsigned long long>(p.result.aborted),
                p.result.truncated ? " TRUNCATED" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-level simulator for a receiver-driven, priority-based "
               "datacenter transport"};
  app.require_subcommand(1);

  CommonArgs run_args, ml_args, ab_args;
  std::string sweep_override;
  double step = 0.02;
  std::string variant;

  CLI::App* run = app.add_subcommand("run", "Run one config or a sweep");
  add_common(run, run_args);
  run->add_option("--sweep", sweep_override,
                  "Sweep override: parameter=v1,v2,... "
                  "(load, overcommit, priorities, unsched_limit)");

  CLI::App* ml = app.add_subcommand(
      "max-load", "Search the maximum sustainable network load");
  add_common(ml, ml_args);
  ml->add_option("--step", step, "Search resolution (default 0.02)");

  CLI::App* ab = app.add_subcommand(
      "ablate", "Run a degraded configuration (priorities=x, overcommit=k, "
                "overcommit=unlimited, basic, unsched_limit=b, cutoffs=a:b:c)");
  add_common(ab, ab_args);
  ab->add_option("--variant", variant, "Which knob to degrade")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return cmd_run(run_args, sweep_override);
    if (ml->parsed()) return cmd_max_load(ml_args, step);
    if (ab->parsed()) return cmd_ablate(ab_args, variant);
  } catch (const homa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
