#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homa/sim/rng.h"

namespace homa {

// Discrete message-size distribution: a step CDF over strictly increasing
// sizes, weighted by message count. Byte-weighted queries derive from the
// same atoms.
//
// File format (one distribution per file):
//   # comment lines
//   size_bytes<TAB>cumulative_fraction
// Sizes strictly increasing, fractions nondecreasing, final fraction 1.0.
class SizeDistribution {
 public:
  struct Atom {
    std::int64_t size;
    double cum;  // message-weighted cumulative fraction
  };

  SizeDistribution() = default;
  explicit SizeDistribution(std::vector<Atom> atoms);

  static SizeDistribution from_file(const std::string& path);
  static SizeDistribution from_sizes_and_cum(
      const std::vector<std::pair<std::int64_t, double>>& entries);

  bool empty() const { return atoms_.empty(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Probability mass of atom i.
  double prob(std::size_t i) const;

  double mean_size() const;
  // E[min(size, cap)]: bytes per message that arrive without authorization
  // when the unscheduled limit is cap.
  double mean_capped(std::int64_t cap) const;

  // Message-weighted CDF at size (fraction of messages with size <= s).
  double cdf(std::int64_t s) const;
  // Smallest size with cdf >= q (q in (0, 1]).
  std::int64_t quantile(double q) const;

  // Inverse-transform sample on the message-weighted CDF.
  std::int64_t sample(Rng& rng) const;

  std::int64_t max_size() const { return atoms_.empty() ? 0 : atoms_.back().size; }

 private:
  void validate() const;
  std::vector<Atom> atoms_;
};

}  // namespace homa
