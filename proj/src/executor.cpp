#include "locq/executor.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#include <unistd.h>
#endif

namespace locq {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ns(Clock::duration d) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(d).count();
}

// Shared state of one sweep's worker crew.
struct SweepContext {
  const Field* src = nullptr;
  Field* dst = nullptr;
  const BlockSet* bs = nullptr;
  const SchedulerMode* mode = nullptr;
  const ThreadMap* tm = nullptr;
  const ExecOptions* opt = nullptr;

  std::vector<Block> list;                      // linearized, owner-stamped
  std::vector<std::vector<Block>> per_thread;   // static-like modes
  std::unique_ptr<LocalityQueueSet> queues;     // capped modes
  std::atomic<long> next{0};                    // dynamic pool cursor
  std::atomic<bool> abort{false};
  Clock::time_point t0;

  std::vector<std::vector<TaskRecord>> records;  // one buffer per thread
};

void sleep_sliced(const SweepContext& cx, int ms) {
  // Slice the stall so an abort cuts it short.
  for (int left = ms; left > 0 && !cx.abort.load(); left -= 10)
    std::this_thread::sleep_for(std::chrono::milliseconds(std::min(left, 10)));
}

void exec_block(SweepContext& cx, int t, const Block& b) {
  const auto start = Clock::now();
  jacobi_sweep_block(*cx.src, *cx.dst, b, *cx.bs);
  const auto stop = Clock::now();
  cx.records[std::size_t(t)].push_back(
      {b, t, ns(start - cx.t0), ns(stop - cx.t0)});
}

void worker(SweepContext& cx, int t) {
  if (cx.opt->pin_threads) pin_hint(t);
  if (cx.opt->inject_stall_ms > 0 && t == cx.opt->stall_thread)
    sleep_sliced(cx, cx.opt->inject_stall_ms);

  switch (cx.mode->kind) {
    case SchedulerMode::Kind::static_chunk:
    case SchedulerMode::Kind::static_cyclic:
    case SchedulerMode::Kind::affinity_replay:
      for (const Block& b : cx.per_thread[std::size_t(t)]) {
        if (cx.abort.load()) return;
        exec_block(cx, t, b);
      }
      return;

    case SchedulerMode::Kind::dynamic_pool: {
      const long n = long(cx.list.size());
      for (long i; (i = cx.next.fetch_add(1)) < n;) {
        if (cx.abort.load()) return;
        exec_block(cx, t, cx.list[std::size_t(i)]);
      }
      return;
    }

    case SchedulerMode::Kind::tasking_capped:
    case SchedulerMode::Kind::locality_queues: {
      const bool per_ld = cx.mode->kind == SchedulerMode::Kind::locality_queues;
      const int my_ld = per_ld ? cx.tm->ld_of[std::size_t(t)] : 0;
      if (t == 0) {
        // Sole submitter; consumes its own share while the system is full,
        // which also keeps a one-thread run from wedging at the cap.
        for (const Block& b : cx.list) {
          while (!cx.abort.load() && cx.queues->pending() >= cx.mode->cap) {
            if (auto own = cx.queues->try_dequeue_steal(my_ld))
              exec_block(cx, t, *own);
            else
              std::this_thread::yield();
          }
          if (cx.abort.load()) break;
          if (per_ld)
            cx.queues->enqueue(b);
          else
            cx.queues->enqueue(0, b);
        }
        cx.queues->finish_production();
      }
      while (!cx.abort.load()) {
        auto b = cx.queues->dequeue_with_steal(my_ld);
        if (!b) return;
        exec_block(cx, t, *b);
      }
      return;
    }
  }
}

}  // namespace

std::vector<RunLog> run_parallel(const Field& src, Field& dst,
                                 const BlockSet& bs, const OwnerMap& om,
                                 const SchedulerMode& mode, const Machine& m,
                                 const ThreadMap& tm, int samples,
                                 const ExecOptions& opt) {
  const int T = m.n_threads();
  if (tm.n_threads() != T || tm.n_ld != m.n_ld)
    throw ExecError("thread map does not match machine");
  if (om.n_ld != m.n_ld) throw ExecError("owner map does not match machine");
  if (samples < 1) throw ExecError("need at least one sample");
  if (!src.same_shape(dst)) throw ExecError("src and dst differ in shape");
  if (mode.cap < 1) throw ExecError("task cap must be >= 1");
  if (mode.kind == SchedulerMode::Kind::affinity_replay && !mode.affinity)
    throw ExecError("replay mode carries no affinity record");

  // The one reference everything is held to: the serial, unblocked sweep.
  Field ref(src.n_i(), src.n_j(), src.n_k(), src.coeff());
  jacobi_sweep_naive(src, ref);

  std::vector<Block> list = blocks_with_owners(bs, om, mode.order);
  std::vector<std::vector<Block>> per_thread;
  switch (mode.kind) {
    case SchedulerMode::Kind::static_chunk:
    case SchedulerMode::Kind::static_cyclic: {
      const ScheduleTrace tr = static_schedule(list, mode.kind, T);
      per_thread.resize(std::size_t(T));
      for (const ExecRecord& e : tr.execs)
        per_thread[std::size_t(e.thread)].push_back(e.block);
      break;
    }
    case SchedulerMode::Kind::affinity_replay: {
      const ScheduleTrace tr = replay_schedule(*mode.affinity, list);
      if (tr.n_threads > T)
        throw ExecError("affinity record names more threads than available");
      per_thread.resize(std::size_t(T));
      for (const ExecRecord& e : tr.execs)
        per_thread[std::size_t(e.thread)].push_back(e.block);
      break;
    }
    default:
      break;
  }

  std::vector<RunLog> logs;
  logs.reserve(std::size_t(samples));
  for (int s = 0; s < samples; ++s) {
    SweepContext cx;
    cx.src = &src;
    cx.dst = &dst;
    cx.bs = &bs;
    cx.mode = &mode;
    cx.tm = &tm;
    cx.opt = &opt;
    cx.list = list;
    cx.per_thread = per_thread;
    if (mode.kind == SchedulerMode::Kind::tasking_capped)
      cx.queues = std::make_unique<LocalityQueueSet>(1);
    else if (mode.kind == SchedulerMode::Kind::locality_queues)
      cx.queues = std::make_unique<LocalityQueueSet>(m.n_ld);
    cx.records.resize(std::size_t(T));

    dst.fill(0.0);  // halo must match the reference's untouched zeros

    std::mutex mx;
    std::condition_variable cv;
    int done = 0;
    cx.t0 = Clock::now();
    std::vector<std::thread> crew;
    crew.reserve(std::size_t(T));
    for (int t = 0; t < T; ++t)
      crew.emplace_back([&cx, &mx, &cv, &done, t] {
        worker(cx, t);
        {
          std::lock_guard<std::mutex> lk(mx);
          ++done;
        }
        cv.notify_one();
      });

    bool finished;
    {
      std::unique_lock<std::mutex> lk(mx);
      finished = cv.wait_for(
          lk, std::chrono::duration<double>(opt.watchdog_s),
          [&] { return done == T; });
    }
    if (!finished) {
      cx.abort.store(true);
      if (cx.queues) cx.queues->request_shutdown();
      for (auto& th : crew) th.join();
      throw ExecError("watchdog: sweep still running after " +
                      std::to_string(opt.watchdog_s) + " s");
    }
    for (auto& th : crew) th.join();
    const std::int64_t wall = ns(Clock::now() - cx.t0);

    // Every block exactly once, from the records themselves.
    std::vector<char> seen(std::size_t(bs.count()), 0);
    long total = 0;
    for (const auto& buf : cx.records)
      for (const TaskRecord& rec : buf) {
        char& flag = seen[std::size_t(bs.index_of(rec.block))];
        if (flag)
          throw ExecError("block (" + std::to_string(rec.block.ib) + "," +
                          std::to_string(rec.block.jb) + "," +
                          std::to_string(rec.block.kb) +
                          ") was executed twice");
        flag = 1;
        ++total;
      }
    if (total != bs.count())
      throw ExecError("sweep executed " + std::to_string(total) + " of " +
                      std::to_string(bs.count()) + " blocks");

    if (!dst.bitwise_equal(ref)) {
      const auto site = dst.first_mismatch(ref);
      throw ExecError("parallel sweep diverged from the serial reference at "
                      "padded site (" +
                      std::to_string(site.i) + "," + std::to_string(site.j) +
                      "," + std::to_string(site.k) + ")");
    }

    RunLog log;
    log.wall_ns = wall;
    log.tasks_per_thread.assign(std::size_t(T), 0);
    for (int t = 0; t < T; ++t) {
      log.tasks_per_thread[std::size_t(t)] =
          long(cx.records[std::size_t(t)].size());
      log.records.insert(log.records.end(),
                         cx.records[std::size_t(t)].begin(),
                         cx.records[std::size_t(t)].end());
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

const char* to_string(PinResult r) {
  return r == PinResult::applied ? "applied" : "unsupported";
}

PinResult pin_hint(int core_id) {
#if defined(__linux__)
  if (core_id < 0) return PinResult::unsupported;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(std::size_t(core_id) % CPU_SETSIZE, &set);
  if (pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0)
    return PinResult::applied;
  const long online = sysconf(_SC_NPROCESSORS_ONLN);
  if (online > 0) {
    CPU_ZERO(&set);
    CPU_SET(std::size_t(core_id % online), &set);
    if (pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0)
      return PinResult::applied;
  }
  return PinResult::unsupported;
#else
  (void)core_id;
  return PinResult::unsupported;
#endif
}

int current_cpu() {
#if defined(__linux__)
  return sched_getcpu();
#else
  return -1;
#endif
}

void write_runlog_csv(const RunLog& log, std::ostream& os) {
  os << "thread,block_ib,block_jb,block_kb,start_ns,stop_ns\n";
  for (const TaskRecord& r : log.records)
    os << r.thread << ',' << r.block.ib << ',' << r.block.jb << ','
       << r.block.kb << ',' << r.start_ns << ',' << r.stop_ns << '\n';
}

std::string runlog_to_json(const RunLog& log) {
  nlohmann::json j;
  j["wall_ns"] = log.wall_ns;
  j["tasks_per_thread"] = log.tasks_per_thread;
  auto recs = nlohmann::json::array();
  for (const TaskRecord& r : log.records)
    recs.push_back({{"thread", r.thread},
                    {"ib", r.block.ib},
                    {"jb", r.block.jb},
                    {"kb", r.block.kb},
                    {"start_ns", r.start_ns},
                    {"stop_ns", r.stop_ns}});
  j["records"] = recs;
  return j.dump(2);
}

}  // namespace locq
