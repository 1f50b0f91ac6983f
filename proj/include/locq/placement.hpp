#pragma once

#include <iosfwd>
#include <vector>

#include "locq/grid.hpp"
#include "locq/topology.hpp"

namespace locq {

/// Loop schedule of the (modeled) initialization loop: contiguous chunks
/// per thread ("static") or round-robin single iterations ("static,1").
enum class LoopSchedule { static_chunk, static_cyclic };
const char* to_string(LoopSchedule s);

/// Page-placement scenario, tracked at block granularity.
struct PlacementPolicy {
  enum class Kind { sequential, interleave, first_touch };
  Kind kind = Kind::first_touch;
  // first_touch only: schedule and linearization order of the init loop.
  LoopSchedule init_schedule = LoopSchedule::static_chunk;
  SubmitOrder init_order = SubmitOrder::ijk;

  static PlacementPolicy sequential() { return {Kind::sequential, {}, {}}; }
  static PlacementPolicy interleave() { return {Kind::interleave, {}, {}}; }
  static PlacementPolicy first_touch(
      LoopSchedule sched = LoopSchedule::static_chunk,
      SubmitOrder order = SubmitOrder::ijk) {
    return {Kind::first_touch, sched, order};
  }
};
const char* to_string(PlacementPolicy::Kind k);

/// Owning LD per block, indexed by BlockSet::index_of. Total once built.
struct OwnerMap {
  std::vector<int> owner;
  int n_ld = 1;

  int of(int block_index) const { return owner[block_index]; }
};

/// Assigns every block an owning locality domain:
///  - sequential: everything in LD 0 (serial initialization).
///  - interleave: round-robin over LDs in ijk linear order.
///  - first_touch: the LD of the thread that initializes the block under the
///    policy's loop schedule and linearization order.
OwnerMap assign_owners(const BlockSet& bs, const PlacementPolicy& policy,
                       const Machine& m, const ThreadMap& tm);

/// Blocks owned per LD; sums to bs.count().
std::vector<long> owner_histogram(const OwnerMap& om, const Machine& m);

/// CSV: ib,jb,kb,owner_ld
void write_owner_csv(const BlockSet& bs, const OwnerMap& om, std::ostream& os);

}  // namespace locq
