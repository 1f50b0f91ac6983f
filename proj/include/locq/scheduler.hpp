#pragma once

#include <array>
#include <atomic>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "locq/grid.hpp"
#include "locq/placement.hpp"
#include "locq/topology.hpp"

namespace locq {

class SchedulerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block -> thread assignment recorded from a previous sweep.
struct TaskAffinity {
  std::map<std::array<int, 3>, int> thread_of;
  int n_threads = 0;
};

/// Task-distribution strategy.
struct SchedulerMode {
  enum class Kind {
    static_chunk,     // contiguous chunks of the linearized list per thread
    static_cyclic,    // list index p -> thread p mod n_threads
    dynamic_pool,     // global FIFO pool, no pending limit
    tasking_capped,   // single submitter + global FIFO, pending <= cap
    locality_queues,  // single submitter + per-LD FIFO queues, pending <= cap
    affinity_replay,  // replay a recorded block -> thread assignment
  };

  Kind kind = Kind::static_chunk;
  int cap = 256;  // pending-task limit for the capped modes
  SubmitOrder order = SubmitOrder::ijk;
  std::shared_ptr<const TaskAffinity> affinity;  // affinity_replay only

  static SchedulerMode static_chunk(SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::static_chunk, 256, o, nullptr};
  }
  static SchedulerMode static_cyclic(SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::static_cyclic, 256, o, nullptr};
  }
  static SchedulerMode dynamic_pool(SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::dynamic_pool, 256, o, nullptr};
  }
  static SchedulerMode tasking(int cap = 256,
                               SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::tasking_capped, cap, o, nullptr};
  }
  static SchedulerMode locality_queues(int cap = 256,
                                       SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::locality_queues, cap, o, nullptr};
  }
  static SchedulerMode replay(std::shared_ptr<const TaskAffinity> aff,
                              SubmitOrder o = SubmitOrder::ijk) {
    return {Kind::affinity_replay, 256, o, std::move(aff)};
  }
};
const char* to_string(SchedulerMode::Kind k);

struct TraceEvent {
  enum class Kind { submit, exec };
  Kind kind;
  int thread;         // exec: consuming thread; submit: submitting thread
  Block block;        // carries the owner LD in `locality` when stamped
  int queue_ld;       // queue involved (exec: source queue); -1 outside
                      // locality-queue mode
  long pending_after; // submitted-but-unexecuted tasks after this event
};

struct ExecRecord {
  long step;  // position among exec events
  int thread;
  Block block;
  int from_ld;  // queue the block came from; -1 for pool/static modes
};

/// Deterministic record of one scheduled sweep. Events carry enough state to
/// replay queue contents exactly; execs is the flat execution view.
struct ScheduleTrace {
  SchedulerMode::Kind kind = SchedulerMode::Kind::static_chunk;
  int n_threads = 0;
  int n_ld = 0;
  int cap = 0;
  SubmitOrder order = SubmitOrder::ijk;
  std::vector<TraceEvent> events;
  std::vector<ExecRecord> execs;

  void rebuild_exec_view();
};

/// Per-LD FIFO queues with work stealing. Multi-producer/multi-consumer;
/// each queue is individually locked, counters are atomic.
class LocalityQueueSet {
 public:
  explicit LocalityQueueSet(int n_ld);

  /// Appends b to the queue of its locality. Requires b.locality in
  /// [0, n_ld).
  void enqueue(const Block& b);
  /// Appends b to an explicit queue (single-pool use keeps queue 0).
  void enqueue(int ld, const Block& b);

  /// Marks production finished; consumers may then observe exhaustion.
  void finish_production();
  bool production_finished() const { return done_.load(); }

  /// Pops the head of one queue, no stealing.
  std::optional<Block> try_dequeue(int ld);

  /// One probe cycle: my_ld, then (my_ld+1) mod n_ld, ... Takes the first
  /// available head; nullopt if the cycle saw every queue empty.
  std::optional<Block> try_dequeue_steal(int my_ld, int* from_ld = nullptr);

  /// Probe cycles until a block is found. Returns nullopt (exhausted) only
  /// once production has finished and no enqueued block remains, or after
  /// request_shutdown().
  std::optional<Block> dequeue_with_steal(int my_ld, int* from_ld = nullptr);

  /// Makes all dequeue_with_steal calls return promptly (watchdog path).
  void request_shutdown();

  /// Enqueued minus dequeued; never negative.
  long pending() const { return pending_.load(); }
  std::size_t size(int ld) const;
  int n_ld() const { return static_cast<int>(queues_.size()); }

 private:
  struct Queue {
    mutable std::mutex mtx;
    std::deque<Block> q;
  };
  std::vector<Queue> queues_;
  std::atomic<long> pending_{0};
  std::atomic<bool> done_{false};
  std::atomic<bool> shutdown_{false};
};

/// Deterministic submit/consume dynamic for the capped modes: a single
/// submitter (thread 0) appends tasks until pending reaches mode.cap, then
/// every thread in id order takes one task per round, the submitter included.
/// Submission resumes as soon as pending drops below the cap.
ScheduleTrace submit_and_serve(const std::vector<Block>& blocks,
                               const SchedulerMode& mode, const Machine& m,
                               const ThreadMap& tm);

/// Worksharing schedules: static_chunk splits the list into contiguous
/// per-thread chunks (sizes differing by at most one); static_cyclic deals
/// index p to thread p mod n_threads.
ScheduleTrace static_schedule(const std::vector<Block>& blocks,
                              SchedulerMode::Kind kind, int n_threads);

/// Global FIFO pool with no pending limit; service is round-robin in
/// thread-id order.
ScheduleTrace dynamic_pool_schedule(const std::vector<Block>& blocks,
                                    int n_threads);

/// Block -> thread map of a completed trace.
TaskAffinity record_affinity(const ScheduleTrace& trace);

/// Assigns each block to its recorded thread; per-thread order follows the
/// new submit order. Throws SchedulerError naming blocks missing from aff.
ScheduleTrace replay_schedule(const TaskAffinity& aff,
                              const std::vector<Block>& blocks);

/// linearize(bs, order) with owner LDs stamped into Block::locality.
std::vector<Block> blocks_with_owners(const BlockSet& bs, const OwnerMap& om,
                                      SubmitOrder order);

/// Linearizes, stamps owners, and dispatches on mode.kind.
ScheduleTrace make_schedule(const BlockSet& bs, const OwnerMap& om,
                            const SchedulerMode& mode, const Machine& m,
                            const ThreadMap& tm);

/// CSV: step,thread,ld,block_ib,block_jb,block_kb,owner_ld,stolen
void write_trace_csv(const ScheduleTrace& tr, const ThreadMap& tm,
                     std::ostream& os);

}  // namespace locq
