#include "locq/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace locq {

double percentile_nearest_rank(std::span<const double> sorted, int p) {
  if (sorted.empty()) throw std::invalid_argument("empty sample");
  if (p <= 0 || p > 100)
    throw std::invalid_argument("percentile must lie in (0, 100]");
  const std::size_t n = sorted.size();
  const std::size_t rank = (std::size_t(p) * n + 99) / 100;  // ceil(p*n/100)
  return sorted[rank - 1];
}

SampleSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  SampleSummary r;
  r.n = s.size();
  r.median = percentile_nearest_rank(s, 50);
  r.q25_lo = percentile_nearest_rank(s, 25);
  r.q25_hi = percentile_nearest_rank(s, 75);
  r.q45_lo = percentile_nearest_rank(s, 5);
  r.q45_hi = percentile_nearest_rank(s, 95);
  return r;
}

}  // namespace locq
