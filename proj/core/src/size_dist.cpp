#include "homa/prio/size_dist.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "homa/sim/error.h"

namespace homa {

SizeDistribution::SizeDistribution(std::vector<Atom> atoms)
    : atoms_(std::move(atoms)) {
  validate();
}

void SizeDistribution::validate() const {
  if (atoms_.empty()) throw ConfigError("size distribution: no entries");
  std::int64_t prev_size = 0;
  double prev_cum = 0.0;
  for (const Atom& a : atoms_) {
    if (a.size <= prev_size) {
      throw ConfigError("size distribution: sizes must be strictly increasing");
    }
    if (a.cum + 1e-12 < prev_cum) {
      throw ConfigError("size distribution: cumulative fractions must not decrease");
    }
    prev_size = a.size;
    prev_cum = a.cum;
  }
  if (std::abs(atoms_.back().cum - 1.0) > 1e-9) {
    throw ConfigError("size distribution: final cumulative fraction must be 1.0");
  }
}

SizeDistribution SizeDistribution::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CDF file: " + path);
  std::vector<Atom> atoms;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::int64_t size;
    double cum;
    if (!(ss >> size)) continue;  // blank or comment-only line
    if (!(ss >> cum)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'size<TAB>cumulative_fraction'");
    }
    atoms.push_back(Atom{size, cum});
  }
  try {
    return SizeDistribution(std::move(atoms));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

SizeDistribution SizeDistribution::from_sizes_and_cum(
    const std::vector<std::pair<std::int64_t, double>>& entries) {
  std::vector<Atom> atoms;
  atoms.reserve(entries.size());
  for (const auto& [s, c] : entries) atoms.push_back(Atom{s, c});
  return SizeDistribution(std::move(atoms));
}

double SizeDistribution::prob(std::size_t i) const {
  return atoms_[i].cum - (i == 0 ? 0.0 : atoms_[i - 1].cum);
}

double SizeDistribution::mean_size() const {
  double m = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    m += static_cast<double>(atoms_[i].size) * prob(i);
  }
  return m;
}

double SizeDistribution::mean_capped(std::int64_t cap) const {
  double m = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    m += static_cast<double>(std::min(atoms_[i].size, cap)) * prob(i);
  }
  return m;
}

double SizeDistribution::cdf(std::int64_t s) const {
  double c = 0;
  for (const Atom& a : atoms_) {
    if (a.size > s) break;
    c = a.cum;
  }
  return c;
}

std::int64_t SizeDistribution::quantile(double q) const {
  for (const Atom& a : atoms_) {
    if (a.cum >= q - 1e-12) return a.size;
  }
  return atoms_.back().size;
}

std::int64_t SizeDistribution::sample(Rng& rng) const {
  const double u = rng.next_double();
  // First atom with cum > u; u < 1 guarantees a hit.
  auto it = std::upper_bound(
      atoms_.begin(), atoms_.end(), u,
      [](double v, const Atom& a) { return v < a.cum; });
  if (it == atoms_.end()) --it;
  return it->size;
}

}  // namespace homa
