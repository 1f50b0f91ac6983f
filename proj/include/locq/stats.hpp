#pragma once

#include <cstddef>
#include <span>

namespace locq {

/// Median and quantile bands of a sample set, nearest-rank method.
/// Band invariant: q45_lo <= q25_lo <= median <= q25_hi <= q45_hi.
struct SampleSummary {
  std::size_t n = 0;
  double median = 0;
  double q25_lo = 0;  // 25th / 75th percentiles
  double q25_hi = 0;
  double q45_lo = 0;  // 5th / 95th percentiles
  double q45_hi = 0;
};

/// Nearest-rank summary: rank ceil(p*n/100) of the sorted list, so the
/// even-n median is the lower of the two central values. Throws
/// std::invalid_argument on empty input.
SampleSummary summarize(std::span<const double> samples);

/// Nearest-rank percentile of an already sorted list, p in (0, 100].
double percentile_nearest_rank(std::span<const double> sorted, int p);

}  // namespace locq
