#include "homa/stats/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "homa/sim/error.h"

namespace homa {

std::uint64_t MetricsCollector::completed() const {
  std::uint64_t n = 0;
  for (const auto& r : records_) n += r.aborted ? 0 : 1;
  return n;
}

std::uint64_t MetricsCollector::aborted() const {
  return records_.size() - completed();
}

double nearest_rank(std::vector<double> values, double percentile) {
  if (values.empty()) throw SimError("nearest_rank: empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<std::int64_t>(values.size());
  auto rank = static_cast<std::int64_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::int64_t>(rank, 1, n);
  return values[rank - 1];
}

SlowdownSpectrum slowdown_spectrum(
    const std::vector<CompletionRecord>& records, const SizeDistribution& cdf,
    const std::function<SimTime(std::int64_t)>& best_case) {
  // Bucket boundaries at the message-count deciles of the workload CDF.
  std::vector<std::int64_t> bounds;
  for (int i = 1; i <= 10; ++i) {
    const std::int64_t b = cdf.quantile(static_cast<double>(i) / 10.0);
    if (bounds.empty() || b > bounds.back()) bounds.push_back(b);
  }

  SlowdownSpectrum out;
  std::vector<std::vector<double>> samples(bounds.size());
  for (const auto& rec : records) {
    if (rec.aborted) continue;
    const auto it = std::lower_bound(bounds.begin(), bounds.end(), rec.size);
    const std::size_t idx =
        std::min(static_cast<std::size_t>(it - bounds.begin()), bounds.size() - 1);
    const double best = static_cast<double>(best_case(rec.size));
    samples[idx].push_back(
        static_cast<double>(rec.finish_time - rec.submit_time) / best);
  }
  std::int64_t lo = 0;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    SpectrumBucket b;
    b.lo = lo;
    b.hi = bounds[i];
    b.count = samples[i].size();
    if (!samples[i].empty()) {
      b.p50 = nearest_rank(samples[i], 50.0);
      b.p99 = nearest_rank(samples[i], 99.0);
    }
    out.buckets.push_back(b);
    lo = bounds[i];
  }
  return out;
}

// ----------------------------------------------------------------- waste

WasteMonitor::WasteMonitor(EventQueue& ev, std::int32_t num_hosts)
    : ev_(ev), hosts_(static_cast<std::size_t>(num_hosts)) {}

void WasteMonitor::update(State& s) {
  const SimTime now = ev_.now();
  if (s.idle && s.denied) s.accum += now - s.since;
  s.since = now;
}

void WasteMonitor::on_downlink_idle(HostId h, bool idle) {
  State& s = hosts_[h];
  update(s);
  s.idle = idle;
}

void WasteMonitor::on_denied_change(HostId h, bool any_denied) {
  State& s = hosts_[h];
  update(s);
  s.denied = any_denied;
}

double WasteMonitor::fraction_for(HostId h, SimTime duration) const {
  if (duration <= 0) return 0;
  const State& s = hosts_[h];
  SimTime accum = s.accum;
  if (s.idle && s.denied && duration > s.since) accum += duration - s.since;
  return static_cast<double>(accum) / static_cast<double>(duration);
}

double WasteMonitor::average_fraction(SimTime duration) const {
  if (hosts_.empty()) return 0;
  double sum = 0;
  for (std::size_t h = 0; h < hosts_.size(); ++h) {
    sum += fraction_for(static_cast<HostId>(h), duration);
  }
  return sum / static_cast<double>(hosts_.size());
}

// ------------------------------------------------------------- breakdown

DelayBreakdown tail_delay_breakdown(
    const std::vector<CompletionRecord>& records, const SizeDistribution& cdf,
    const std::function<SimTime(std::int64_t)>& best_case) {
  DelayBreakdown out;
  const std::int64_t small_cutoff = cdf.quantile(0.2);
  std::vector<const CompletionRecord*> small;
  for (const auto& r : records) {
    if (!r.aborted && r.size <= small_cutoff) small.push_back(&r);
  }
  if (small.empty()) return out;

  std::vector<double> delays;
  delays.reserve(small.size());
  for (const auto* r : small) {
    delays.push_back(static_cast<double>(r->finish_time - r->submit_time));
  }
  const double p99 = nearest_rank(delays, 99.0);
  out.observed_p99_ns = p99;

  // Average the components across messages whose delay lands near the 99th
  // percentile (within 1%).
  double best = 0, pre = 0, que = 0, obs = 0;
  std::uint64_t n = 0;
  for (const auto* r : small) {
    const double d = static_cast<double>(r->finish_time - r->submit_time);
    if (d < p99 * 0.99 || d > p99 * 1.01) continue;
    obs += d;
    best += static_cast<double>(best_case(r->size));
    pre += static_cast<double>(r->preempt_wait);
    que += static_cast<double>(r->queue_wait);
    ++n;
  }
  if (n == 0) return out;
  out.population = n;
  out.observed_p99_ns = obs / static_cast<double>(n);
  out.best_case_ns = best / static_cast<double>(n);
  out.preempt_lag_ns = pre / static_cast<double>(n);
  out.queueing_ns = que / static_cast<double>(n);
  out.residual_ns = out.observed_p99_ns - out.best_case_ns -
                    out.preempt_lag_ns - out.queueing_ns;
  return out;
}

// ------------------------------------------------------------------- CSVs

namespace {
std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write " + path);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}
}  // namespace

void write_completions_csv(const std::string& path,
                           const std::vector<CompletionRecord>& records) {
  auto out = open_csv(path);
  out << "rpc_id,size,submit_ns,finish_ns,retx_bytes,aborted\n";
  for (const auto& r : records) {
    out << r.rpc_id << ',' << r.size << ',' << r.submit_time << ','
        << r.finish_time << ',' << r.retransmitted_bytes << ','
        << (r.aborted ? 1 : 0) << '\n';
  }
}

void write_spectrum_csv(const std::string& path, const SlowdownSpectrum& s) {
  auto out = open_csv(path);
  out << "bucket_lo,bucket_hi,p50,p99,count\n";
  for (const auto& b : s.buckets) {
    out << b.lo << ',' << b.hi << ',' << fmt(b.p50) << ',' << fmt(b.p99) << ','
        << b.count << '\n';
  }
}

void write_ports_csv(const std::string& path,
                     const std::vector<Network::PortReport>& ports) {
  auto out = open_csv(path);
  out << "port,kind,mean_bytes,max_bytes,drops,packets\n";
  for (const auto& p : ports) {
    out << p.name << ',' << port_kind_name(p.kind) << ','
        << fmt(p.stats.mean_bytes) << ',' << p.stats.max_bytes << ','
        << p.stats.drops << ',' << p.stats.packets << '\n';
  }
}

void write_priousage_csv(const std::string& path,
                         const std::array<std::int64_t, kNumPriorities>& bytes,
                         double capacity_bytes) {
  auto out = open_csv(path);
  out << "priority,bytes,fraction_of_capacity\n";
  for (int i = 0; i < kNumPriorities; ++i) {
    const double frac =
        capacity_bytes > 0 ? static_cast<double>(bytes[i]) / capacity_bytes : 0;
    out << i << ',' << bytes[i] << ',' << fmt(frac) << '\n';
  }
}

void write_breakdown_csv(const std::string& path, const DelayBreakdown& b) {
  auto out = open_csv(path);
  out << "metric,value\n";
  out << "population," << b.population << '\n';
  out << "observed_p99_ns," << fmt(b.observed_p99_ns) << '\n';
  out << "best_case_ns," << fmt(b.best_case_ns) << '\n';
  out << "preempt_lag_ns," << fmt(b.preempt_lag_ns) << '\n';
  out << "queueing_ns," << fmt(b.queueing_ns) << '\n';
  out << "residual_ns," << fmt(b.residual_ns) << '\n';
}

FileTrace::FileTrace(const std::string& path) : out_(path) {
  if (!out_) throw SimError("cannot open trace file " + path);
}

void FileTrace::on_event(SimTime t, const char* event, HostId host,
                         const Packet& p) {
  out_ << t << ' ' << event << " host=" << host << ' ' << kind_name(p.kind)
       << " rpc=" << p.rpc_id << " src=" << p.src << " dst=" << p.dst
       << " prio=" << static_cast<int>(p.wire_priority)
       << " off=" << p.offset << " len=" << p.length
       << (p.retransmit ? " retx" : "") << '\n';
}

}  // namespace homa
