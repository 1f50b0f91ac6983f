#include "locq/scheduler.hpp"

#include <ostream>
#include <thread>

#include "locq/partition.hpp"

namespace locq {

const char* to_string(SchedulerMode::Kind k) {
  switch (k) {
    case SchedulerMode::Kind::static_chunk:
      return "static-chunk";
    case SchedulerMode::Kind::static_cyclic:
      return "static-cyclic";
    case SchedulerMode::Kind::dynamic_pool:
      return "dynamic";
    case SchedulerMode::Kind::tasking_capped:
      return "tasking";
    case SchedulerMode::Kind::locality_queues:
      return "locality-queues";
    case SchedulerMode::Kind::affinity_replay:
      return "replay";
  }
  return "?";
}

void ScheduleTrace::rebuild_exec_view() {
  execs.clear();
  long step = 0;
  for (const TraceEvent& e : events)
    if (e.kind == TraceEvent::Kind::exec)
      execs.push_back({step++, e.thread, e.block, e.queue_ld});
}

// ---------------------------------------------------------------- queues --

LocalityQueueSet::LocalityQueueSet(int n_ld)
    : queues_(n_ld >= 1 ? std::size_t(n_ld) : 1) {
  if (n_ld < 1)
    throw SchedulerError("queue set needs at least one locality domain");
}

void LocalityQueueSet::enqueue(const Block& b) { enqueue(b.locality, b); }

void LocalityQueueSet::enqueue(int ld, const Block& b) {
  if (ld < 0 || ld >= n_ld())
    throw SchedulerError("enqueue to locality " + std::to_string(ld) +
                         " outside [0, " + std::to_string(n_ld()) + ")");
  // Count first, push second: pending() may overshoot momentarily but never
  // undershoots, so a cap gate reading it stays conservative.
  pending_.fetch_add(1);
  Queue& qu = queues_[std::size_t(ld)];
  std::lock_guard<std::mutex> lock(qu.mtx);
  qu.q.push_back(b);
}

void LocalityQueueSet::finish_production() { done_.store(true); }

std::optional<Block> LocalityQueueSet::try_dequeue(int ld) {
  Queue& qu = queues_[std::size_t(ld)];
  std::optional<Block> out;
  {
    std::lock_guard<std::mutex> lock(qu.mtx);
    if (qu.q.empty()) return std::nullopt;
    out = qu.q.front();
    qu.q.pop_front();
  }
  pending_.fetch_sub(1);
  return out;
}

std::optional<Block> LocalityQueueSet::try_dequeue_steal(int my_ld,
                                                         int* from_ld) {
  const int n = n_ld();
  for (int d = 0; d < n; ++d) {
    const int ld = (my_ld + d) % n;
    if (auto b = try_dequeue(ld)) {
      if (from_ld) *from_ld = ld;
      return b;
    }
  }
  return std::nullopt;
}

std::optional<Block> LocalityQueueSet::dequeue_with_steal(int my_ld,
                                                          int* from_ld) {
  while (!shutdown_.load()) {
    if (auto b = try_dequeue_steal(my_ld, from_ld)) return b;
    // done_ before pending_: once production is marked finished the count
    // can only fall, so done && pending == 0 means exhausted for good.
    if (done_.load() && pending_.load() == 0) return std::nullopt;
    std::this_thread::yield();
  }
  return std::nullopt;
}

void LocalityQueueSet::request_shutdown() { shutdown_.store(true); }

std::size_t LocalityQueueSet::size(int ld) const {
  const Queue& qu = queues_[std::size_t(ld)];
  std::lock_guard<std::mutex> lock(qu.mtx);
  return qu.q.size();
}

// ---------------------------------------------------------- trace builders --

namespace {

void validate_mode(const SchedulerMode& mode) {
  if (mode.cap < 1)
    throw SchedulerError("task cap must be >= 1 (got " +
                         std::to_string(mode.cap) + ")");
}

ScheduleTrace trace_shell(SchedulerMode::Kind kind, int n_threads, int n_ld,
                          int cap, SubmitOrder order) {
  ScheduleTrace tr;
  tr.kind = kind;
  tr.n_threads = n_threads;
  tr.n_ld = n_ld;
  tr.cap = cap;
  tr.order = order;
  return tr;
}

// Round-robin interleave of per-thread lists; the deterministic stand-in
// for "all threads advance at the same rate".
void emit_round_robin(ScheduleTrace& tr,
                      const std::vector<std::vector<Block>>& per_thread) {
  std::size_t longest = 0;
  for (const auto& l : per_thread) longest = std::max(longest, l.size());
  long remaining = 0;
  for (const auto& l : per_thread) remaining += long(l.size());
  for (std::size_t r = 0; r < longest; ++r)
    for (std::size_t t = 0; t < per_thread.size(); ++t)
      if (r < per_thread[t].size())
        tr.events.push_back({TraceEvent::Kind::exec, int(t), per_thread[t][r],
                             -1, --remaining});
}

}  // namespace

ScheduleTrace static_schedule(const std::vector<Block>& blocks,
                              SchedulerMode::Kind kind, int n_threads) {
  if (n_threads < 1) throw SchedulerError("need at least one thread");
  ScheduleTrace tr = trace_shell(kind, n_threads, 0, 0, SubmitOrder::ijk);
  std::vector<std::vector<Block>> per_thread(static_cast<std::size_t>(n_threads));
  if (kind == SchedulerMode::Kind::static_chunk) {
    for (int t = 0; t < n_threads; ++t) {
      const auto [b, e] = chunk_range(long(blocks.size()), n_threads, t);
      per_thread[std::size_t(t)].assign(blocks.begin() + b, blocks.begin() + e);
    }
  } else if (kind == SchedulerMode::Kind::static_cyclic) {
    for (std::size_t p = 0; p < blocks.size(); ++p)
      per_thread[p % std::size_t(n_threads)].push_back(blocks[p]);
  } else {
    throw SchedulerError("static_schedule handles the worksharing kinds only");
  }
  emit_round_robin(tr, per_thread);
  tr.rebuild_exec_view();
  return tr;
}

ScheduleTrace dynamic_pool_schedule(const std::vector<Block>& blocks,
                                    int n_threads) {
  if (n_threads < 1) throw SchedulerError("need at least one thread");
  ScheduleTrace tr = trace_shell(SchedulerMode::Kind::dynamic_pool, n_threads,
                                 0, 0, SubmitOrder::ijk);
  // Uniform service rate: the pool degenerates to dealing tasks cyclically.
  long remaining = long(blocks.size());
  for (std::size_t p = 0; p < blocks.size(); ++p)
    tr.events.push_back({TraceEvent::Kind::exec, int(p % std::size_t(n_threads)),
                         blocks[p], -1, --remaining});
  tr.rebuild_exec_view();
  return tr;
}

ScheduleTrace submit_and_serve(const std::vector<Block>& blocks,
                               const SchedulerMode& mode, const Machine& m,
                               const ThreadMap& tm) {
  validate_mode(mode);
  if (mode.kind != SchedulerMode::Kind::tasking_capped &&
      mode.kind != SchedulerMode::Kind::locality_queues)
    throw SchedulerError("submit_and_serve handles the capped kinds only");
  const bool per_ld = mode.kind == SchedulerMode::Kind::locality_queues;
  const int T = tm.n_threads();
  const int n_q = per_ld ? m.n_ld : 1;
  ScheduleTrace tr = trace_shell(mode.kind, T, m.n_ld, mode.cap, mode.order);

  std::vector<std::deque<Block>> queues(static_cast<std::size_t>(n_q));
  long pending = 0;
  std::size_t next = 0;
  int turn = 0;  // next consuming thread, cyclic

  // One submitter (thread 0) tops the system up to the cap, then exactly one
  // consumer takes one task; repeat. This is the fair deterministic
  // interleaving of "submit until full, serve while draining".
  while (true) {
    while (next < blocks.size() && pending < mode.cap) {
      const Block& b = blocks[next++];
      const int q = per_ld ? b.locality : 0;
      if (q < 0 || q >= n_q)
        throw SchedulerError("block owner " + std::to_string(q) +
                             " outside [0, " + std::to_string(n_q) + ")");
      queues[std::size_t(q)].push_back(b);
      ++pending;
      tr.events.push_back(
          {TraceEvent::Kind::submit, 0, b, per_ld ? q : -1, pending});
    }
    if (pending == 0) break;  // nothing queued and nothing left to submit

    const int t = turn;
    turn = (turn + 1) % T;
    const int home = per_ld ? tm.ld_of[std::size_t(t)] : 0;
    for (int d = 0; d < n_q; ++d) {
      const int q = (home + d) % n_q;
      if (queues[std::size_t(q)].empty()) continue;
      const Block b = queues[std::size_t(q)].front();
      queues[std::size_t(q)].pop_front();
      --pending;
      tr.events.push_back(
          {TraceEvent::Kind::exec, t, b, per_ld ? q : -1, pending});
      break;
    }
  }
  tr.rebuild_exec_view();
  return tr;
}

TaskAffinity record_affinity(const ScheduleTrace& trace) {
  TaskAffinity aff;
  aff.n_threads = trace.n_threads;
  for (const ExecRecord& e : trace.execs)
    aff.thread_of[{e.block.ib, e.block.jb, e.block.kb}] = e.thread;
  return aff;
}

ScheduleTrace replay_schedule(const TaskAffinity& aff,
                              const std::vector<Block>& blocks) {
  if (aff.n_threads < 1)
    throw SchedulerError("affinity record names no threads");
  ScheduleTrace tr = trace_shell(SchedulerMode::Kind::affinity_replay,
                                 aff.n_threads, 0, 0, SubmitOrder::ijk);
  std::vector<std::vector<Block>> per_thread(static_cast<std::size_t>(aff.n_threads));
  for (const Block& b : blocks) {
    const auto it = aff.thread_of.find({b.ib, b.jb, b.kb});
    if (it == aff.thread_of.end())
      throw SchedulerError("affinity record misses block (" +
                           std::to_string(b.ib) + "," + std::to_string(b.jb) +
                           "," + std::to_string(b.kb) + ")");
    if (it->second < 0 || it->second >= aff.n_threads)
      throw SchedulerError("affinity record maps a block to thread " +
                           std::to_string(it->second) + " outside [0, " +
                           std::to_string(aff.n_threads) + ")");
    per_thread[std::size_t(it->second)].push_back(b);
  }
  emit_round_robin(tr, per_thread);
  tr.rebuild_exec_view();
  return tr;
}

std::vector<Block> blocks_with_owners(const BlockSet& bs, const OwnerMap& om,
                                      SubmitOrder order) {
  std::vector<Block> list = linearize(bs, order);
  for (Block& b : list) b.locality = om.of(bs.index_of(b));
  return list;
}

ScheduleTrace make_schedule(const BlockSet& bs, const OwnerMap& om,
                            const SchedulerMode& mode, const Machine& m,
                            const ThreadMap& tm) {
  if (tm.n_ld != m.n_ld || tm.n_threads() != m.n_threads())
    throw SchedulerError("thread map does not match machine");
  if (om.n_ld != m.n_ld)
    throw SchedulerError("owner map does not match machine");
  const auto list = blocks_with_owners(bs, om, mode.order);
  ScheduleTrace tr;
  switch (mode.kind) {
    case SchedulerMode::Kind::static_chunk:
    case SchedulerMode::Kind::static_cyclic:
      tr = static_schedule(list, mode.kind, m.n_threads());
      break;
    case SchedulerMode::Kind::dynamic_pool:
      tr = dynamic_pool_schedule(list, m.n_threads());
      break;
    case SchedulerMode::Kind::tasking_capped:
    case SchedulerMode::Kind::locality_queues:
      tr = submit_and_serve(list, mode, m, tm);
      break;
    case SchedulerMode::Kind::affinity_replay:
      if (!mode.affinity)
        throw SchedulerError("replay mode carries no affinity record");
      tr = replay_schedule(*mode.affinity, list);
      break;
  }
  tr.kind = mode.kind;
  tr.n_ld = m.n_ld;
  tr.cap = mode.cap;
  tr.order = mode.order;
  return tr;
}

void write_trace_csv(const ScheduleTrace& tr, const ThreadMap& tm,
                     std::ostream& os) {
  os << "step,thread,ld,block_ib,block_jb,block_kb,owner_ld,stolen\n";
  for (const ExecRecord& e : tr.execs) {
    const int ld = tm.ld_of[std::size_t(e.thread)];
    const int stolen = (e.from_ld >= 0 && ld != e.from_ld) ? 1 : 0;
    os << e.step << ',' << e.thread << ',' << ld << ',' << e.block.ib << ','
       << e.block.jb << ',' << e.block.kb << ',' << e.block.locality << ','
       << stolen << '\n';
  }
}

}  // namespace locq
