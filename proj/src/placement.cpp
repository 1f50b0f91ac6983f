#include "locq/placement.hpp"

#include <ostream>
#include <stdexcept>

#include "locq/partition.hpp"

namespace locq {

const char* to_string(LoopSchedule s) {
  return s == LoopSchedule::static_chunk ? "static" : "static,1";
}

const char* to_string(PlacementPolicy::Kind k) {
  switch (k) {
    case PlacementPolicy::Kind::sequential:
      return "sequential";
    case PlacementPolicy::Kind::interleave:
      return "interleave";
    case PlacementPolicy::Kind::first_touch:
      return "first-touch";
  }
  return "?";
}

OwnerMap assign_owners(const BlockSet& bs, const PlacementPolicy& policy,
                       const Machine& m, const ThreadMap& tm) {
  if (tm.n_ld != m.n_ld || tm.n_threads() != m.n_threads())
    throw std::invalid_argument("thread map does not match machine");
  OwnerMap om;
  om.n_ld = m.n_ld;
  om.owner.assign(std::size_t(bs.count()), 0);
  switch (policy.kind) {
    case PlacementPolicy::Kind::sequential:
      break;  // one thread touches everything: all pages land in LD 0
    case PlacementPolicy::Kind::interleave:
      for (int p = 0; p < bs.count(); ++p) om.owner[p] = p % m.n_ld;
      break;
    case PlacementPolicy::Kind::first_touch: {
      const auto list = linearize(bs, policy.init_order);
      const int T = tm.n_threads();
      if (policy.init_schedule == LoopSchedule::static_chunk) {
        for (int t = 0; t < T; ++t) {
          const auto [b, e] = chunk_range(long(list.size()), T, t);
          for (long p = b; p < e; ++p)
            om.owner[bs.index_of(list[std::size_t(p)])] = tm.ld_of[t];
        }
      } else {
        for (std::size_t p = 0; p < list.size(); ++p)
          om.owner[bs.index_of(list[p])] = tm.ld_of[p % T];
      }
      break;
    }
  }
  return om;
}

std::vector<long> owner_histogram(const OwnerMap& om, const Machine& m) {
  std::vector<long> counts(std::size_t(m.n_ld), 0);
  for (int o : om.owner) ++counts[std::size_t(o)];
  return counts;
}

void write_owner_csv(const BlockSet& bs, const OwnerMap& om,
                     std::ostream& os) {
  os << "ib,jb,kb,owner_ld\n";
  for (const Block& b : bs.blocks())
    os << b.ib << ',' << b.jb << ',' << b.kb << ','
       << om.of(bs.index_of(b)) << '\n';
}

}  // namespace locq
