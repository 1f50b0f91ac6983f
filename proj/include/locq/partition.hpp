#pragma once

#include <algorithm>
#include <utility>

namespace locq {

/// Contiguous [begin, end) range for part `idx` when `total` items are split
/// into `parts` chunks whose sizes differ by at most one.
inline std::pair<long, long> chunk_range(long total, int parts, int idx) {
  const long base = total / parts;
  const long extra = total % parts;
  const long begin = idx * base + std::min<long>(idx, extra);
  const long end = begin + base + (idx < extra ? 1 : 0);
  return {begin, end};
}

}  // namespace locq
