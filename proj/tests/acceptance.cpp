// Acceptance gate for the locality-queue scheduling testbed. Each numbered
// criterion prints exactly one PASS/FAIL line; the process exits nonzero if
// any of them fail. Everything here is deterministic.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "locq/executor.hpp"
#include "locq/grid.hpp"
#include "locq/placement.hpp"
#include "locq/scheduler.hpp"
#include "locq/simulator.hpp"
#include "locq/stats.hpp"
#include "locq/topology.hpp"

namespace {

using namespace locq;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s (%s)\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// The acceptance-scale decomposition: 24 x 60 x 1 = 1440 blocks, enough for
// a 256-task cap to bite and divisible by every preset's thread count.
BlockSet big_blocks() { return BlockSet(2400, 600, 600, {100, 10, 600}); }

const std::vector<PlacementPolicy>& policies() {
  static const std::vector<PlacementPolicy> p = {
      PlacementPolicy::sequential(), PlacementPolicy::interleave(),
      PlacementPolicy::first_touch(LoopSchedule::static_chunk),
      PlacementPolicy::first_touch(LoopSchedule::static_cyclic,
                                   SubmitOrder::kji)};
  return p;
}

double predicted_mlups(const BlockSet& bs, const Machine& m,
                       const PlacementPolicy& policy,
                       const SchedulerMode& mode) {
  const ThreadMap tm = default_thread_map(m);
  const OwnerMap om = assign_owners(bs, policy, m, tm);
  const ScheduleTrace tr = make_schedule(bs, om, mode, m, tm);
  return simulate_sweep(tr, om, m, tm, TrafficModel::nontemporal(), bs).mlups;
}

// ---- 1: bitwise equivalence of every mode x policy x thread count ----------

void criterion_1() {
  const auto t0 = Clock::now();
  const int cubes[] = {8, 12, 16, 20, 24, 28, 32, 40, 48, 64};
  const Machine base = load_preset("istanbul");
  int fields = 0;
  long sweeps = 0;
  bool ok = true;
  std::string why;
  try {
    for (const int n : cubes) {
      for (int rep = 0; rep < 5 && ok; ++rep) {
        ++fields;
        Field src(n, n, n);
        src.fill_random(0x5eedu + std::uint64_t(fields));
        Field dst(n, n, n);
        const BlockSet bs(n, n, n, {n / 4, n / 4, n / 2});  // 32 blocks
        for (const int threads : {1, 2, 4, 8, 24}) {
          const Machine m = with_thread_count(base, threads);
          const ThreadMap tm = default_thread_map(m);
          for (const PlacementPolicy& policy : policies()) {
            const OwnerMap om = assign_owners(bs, policy, m, tm);
            std::vector<SchedulerMode> modes = {
                SchedulerMode::static_chunk(), SchedulerMode::static_cyclic(),
                SchedulerMode::dynamic_pool(), SchedulerMode::tasking(17),
                SchedulerMode::locality_queues(17)};
            const ScheduleTrace lq = make_schedule(
                bs, om, SchedulerMode::locality_queues(17), m, tm);
            modes.push_back(SchedulerMode::replay(
                std::make_shared<TaskAffinity>(record_affinity(lq))));
            for (const SchedulerMode& mode : modes) {
              // run_parallel itself throws on any bitwise divergence from
              // the serial reference sweep.
              run_parallel(src, dst, bs, om, mode, m, tm, 1);
              ++sweeps;
            }
          }
        }
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    why = e.what();
  }
  const double dt = seconds_since(t0);
  if (ok && fields < 50) {
    ok = false;
    why = "only " + std::to_string(fields) + " fields";
  }
  if (ok && dt >= 120.0) {
    ok = false;
    why = "too slow";
  }
  report(1, "bitwise-equivalence-matrix", ok,
         ok ? std::to_string(fields) + " fields, " + std::to_string(sweeps) +
                  " sweeps bitwise-equal to the serial reference in " +
                  fmt(dt) + " s"
            : why + " after " + fmt(dt) + " s");
}

// ---- 2: exactly-once execution under stress --------------------------------

void criterion_2() {
  const auto t0 = Clock::now();
  const Machine m = load_preset("istanbul");
  const ThreadMap tm = default_thread_map(m);
  const int n = 24;
  const BlockSet bs(n, n, n, {4, 4, 8});  // 108 blocks
  Field src(n, n, n);
  src.fill_random(77);
  Field dst(n, n, n);
  const PlacementPolicy policy = PlacementPolicy::first_touch();
  const OwnerMap om = assign_owners(bs, policy, m, tm);

  bool ok = true;
  std::string why;
  long recounted = 0;
  try {
    const auto logs =
        run_parallel(src, dst, bs, om, SchedulerMode::locality_queues(17), m,
                     tm, /*samples=*/100);
    for (const RunLog& log : logs) {
      std::vector<int> seen(std::size_t(bs.count()), 0);
      for (const TaskRecord& r : log.records)
        ++seen[std::size_t(bs.index_of(r.block))];
      if (std::count(seen.begin(), seen.end(), 1) != bs.count()) {
        ok = false;
        why = "a stress sweep lost or duplicated a block";
        break;
      }
      ++recounted;
    }
  } catch (const std::exception& e) {
    ok = false;
    why = e.what();
  }
  const double dt = seconds_since(t0);
  if (ok && dt >= 180.0) {
    ok = false;
    why = "too slow";
  }
  report(2, "exactly-once-under-stress", ok,
         ok ? std::to_string(recounted) +
                  " contended 24-thread sweeps recounted, every block "
                  "exactly once, in " + fmt(dt) +
                  " s; the criterion-1 matrix runs under the same "
                  "in-executor recount"
            : why);
}

// ---- 3: baseline ordering on every preset -----------------------------------

void criterion_3() {
  const BlockSet bs = big_blocks();
  bool ok = true;
  std::ostringstream detail;
  for (const std::string& name : preset_names()) {
    const Machine m = load_preset(name);
    const SchedulerMode chunk = SchedulerMode::static_chunk();
    const double seq =
        predicted_mlups(bs, m, PlacementPolicy::sequential(), chunk);
    const double il =
        predicted_mlups(bs, m, PlacementPolicy::interleave(), chunk);
    const double ft =
        predicted_mlups(bs, m, PlacementPolicy::first_touch(), chunk);
    ok = ok && seq < il && il < ft;
    detail << name << " " << fmt(seq) << " < " << fmt(il) << " < " << fmt(ft)
           << "; ";
  }
  report(3, "baseline-placement-ordering", ok, detail.str());
}

// ---- 4: first-touch optimum is exact ----------------------------------------

void criterion_4() {
  const BlockSet bs = big_blocks();
  bool ok = true;
  std::ostringstream detail;
  for (const std::string& name : preset_names()) {
    const Machine m = load_preset(name);
    const ThreadMap tm = default_thread_map(m);
    const OwnerMap om =
        assign_owners(bs, PlacementPolicy::first_touch(), m, tm);
    const ScheduleTrace tr =
        make_schedule(bs, om, SchedulerMode::static_chunk(), m, tm);
    const SimReport r =
        simulate_sweep(tr, om, m, tm, TrafficModel::nontemporal(), bs);
    const double expect = double(m.n_ld) * m.bw_ld;
    const bool here = r.local_fraction == 1.0 && r.predicted_bw == expect;
    ok = ok && here;
    detail << name << " local=" << fmt(r.local_fraction)
           << " bw=" << fmt(r.predicted_bw) << (here ? " == " : " != ")
           << fmt(expect) << "; ";
  }
  report(4, "first-touch-optimum-exact", ok, detail.str());
}

// ---- 5: the well-ordered capped schedules stay within 10% -------------------

void criterion_5() {
  const BlockSet bs = big_blocks();
  bool ok = true;
  std::ostringstream detail;
  for (const std::string& name : preset_names()) {
    const Machine m = load_preset(name);
    const double ref = predicted_mlups(bs, m, PlacementPolicy::first_touch(),
                                       SchedulerMode::static_chunk());
    // Either fix works: submit in kji order, or initialize round robin.
    const double kji =
        predicted_mlups(bs, m, PlacementPolicy::first_touch(),
                        SchedulerMode::locality_queues(256, SubmitOrder::kji));
    const double cyc = predicted_mlups(
        bs, m, PlacementPolicy::first_touch(LoopSchedule::static_cyclic),
        SchedulerMode::locality_queues(256, SubmitOrder::ijk));
    const bool here = kji >= 0.90 * ref && cyc >= 0.90 * ref;
    ok = ok && here;
    detail << name << " kji=" << fmt(kji / ref) << "x cyclic-init="
           << fmt(cyc / ref) << "x of ref; ";
  }
  report(5, "capped-modes-within-10-percent", ok, detail.str());
}

// ---- 6: the ijk + chunked-init pathology ------------------------------------

void criterion_6() {
  // The pathology machine: the default four-domain, six-core preset.
  const BlockSet bs = big_blocks();
  const Machine m = load_preset("istanbul");
  const ThreadMap tm = default_thread_map(m);
  const PlacementPolicy ft = PlacementPolicy::first_touch();
  bool ok = true;
  std::ostringstream detail;

  for (const auto kind : {SchedulerMode::Kind::tasking_capped,
                          SchedulerMode::Kind::locality_queues}) {
    SchedulerMode ijk{kind, 256, SubmitOrder::ijk, nullptr};
    SchedulerMode kji{kind, 256, SubmitOrder::kji, nullptr};
    const double slow = predicted_mlups(bs, m, ft, ijk);
    const double fast = predicted_mlups(bs, m, ft, kji);
    ok = ok && slow < fast;
    detail << to_string(kind) << " ijk " << fmt(slow) << " < kji "
           << fmt(fast) << "; ";
  }

  // The mechanism: with chunked init and ijk submission one queue hoards
  // nearly all pending work through the first half of the sweep.
  const OwnerMap om = assign_owners(bs, ft, m, tm);
  const ScheduleTrace tr = make_schedule(
      bs, om, SchedulerMode::locality_queues(256, SubmitOrder::ijk), m, tm);
  std::vector<long> qsize(std::size_t(m.n_ld), 0);
  long execs_seen = 0;
  const long half = long(tr.execs.size()) / 2;
  double max_share = 0;
  for (const TraceEvent& e : tr.events) {
    if (e.kind == TraceEvent::Kind::submit)
      ++qsize[std::size_t(e.queue_ld)];
    else {
      --qsize[std::size_t(e.queue_ld)];
      ++execs_seen;
    }
    if (execs_seen > half) break;
    if (e.pending_after > 0) {
      const long biggest = *std::max_element(qsize.begin(), qsize.end());
      max_share =
          std::max(max_share, double(biggest) / double(e.pending_after));
    }
  }
  ok = ok && max_share > 0.9;
  detail << "max single-queue pending share in first half = "
         << fmt(max_share);
  report(6, "ijk-chunked-init-pathology", ok, detail.str());
}

// ---- 7: the pending count never exceeds the cap ------------------------------

void criterion_7() {
  const BlockSet bs = big_blocks();
  const Machine m = load_preset("istanbul");
  const ThreadMap tm = default_thread_map(m);
  const OwnerMap om =
      assign_owners(bs, PlacementPolicy::first_touch(), m, tm);
  bool ok = true;
  std::ostringstream detail;
  for (const auto kind : {SchedulerMode::Kind::tasking_capped,
                          SchedulerMode::Kind::locality_queues})
    for (const int cap : {1, 17, 256, bs.count()}) {
      SchedulerMode mode{kind, cap, SubmitOrder::ijk, nullptr};
      const ScheduleTrace tr = make_schedule(bs, om, mode, m, tm);
      long worst = 0, submits = 0, execs = 0;
      bool consistent = true;
      for (const TraceEvent& e : tr.events) {
        (e.kind == TraceEvent::Kind::submit ? submits : execs) += 1;
        consistent = consistent && e.pending_after == submits - execs &&
                     e.pending_after >= 0;
        worst = std::max(worst, e.pending_after);
      }
      ok = ok && consistent && worst <= cap && execs == bs.count();
      if (kind == SchedulerMode::Kind::locality_queues)
        detail << "cap " << cap << ": peak " << worst << "; ";
    }
  report(7, "pending-never-exceeds-cap", ok, detail.str());
}

// ---- 8: steal order, brute forced --------------------------------------------

void criterion_8() {
  bool ok = true;
  int cases = 0;
  std::string why;
  for (int n = 1; n <= 4 && ok; ++n) {
    for (unsigned mask = 0; mask < (1u << n) && ok; ++mask) {
      for (int my = 0; my < n && ok; ++my) {
        LocalityQueueSet qs(n);
        for (int ld = 0; ld < n; ++ld)
          if (mask & (1u << ld)) qs.enqueue(Block{ld, 0, 0, ld});
        int expected = -1;
        for (int d = 0; d < n && expected < 0; ++d)
          if (mask & (1u << ((my + d) % n))) expected = (my + d) % n;
        int from = -1;
        const auto got = qs.try_dequeue_steal(my, &from);
        const bool here = expected < 0
                              ? !got.has_value()
                              : got.has_value() && from == expected &&
                                    got->ib == expected;
        if (!here) {
          ok = false;
          why = "n=" + std::to_string(n) + " mask=" + std::to_string(mask) +
                " my=" + std::to_string(my);
        }
        ++cases;
      }
    }
  }
  report(8, "steal-probe-order-bruteforce", ok,
         ok ? std::to_string(cases) +
                  " queue patterns match the (home+d) mod n probe oracle"
            : why);
}

// ---- 9: bandwidth scaling ratios ---------------------------------------------

void criterion_9() {
  struct Expect {
    const char* name;
    double ratio;
  };
  const Expect table[] = {
      {"istanbul", 1.026}, {"nehalem-ep", 1.033}, {"nehalem-ex", 0.976}};
  bool ok = true;
  std::ostringstream detail;
  for (const Expect& e : table) {
    const double got = bandwidth_scaling_ratio(load_preset(e.name));
    const bool here = std::abs(got - e.ratio) <= 0.001;
    ok = ok && here;
    detail << e.name << " " << fmt(got) << (here ? " ~ " : " !~ ")
           << fmt(e.ratio) << "; ";
  }
  report(9, "bandwidth-scaling-ratios", ok, detail.str());
}

// ---- 10: summary statistics against a brute-force oracle ---------------------

double oracle_percentile(std::vector<double> v, int p) {
  std::sort(v.begin(), v.end());
  for (std::size_t r = 1; r <= v.size(); ++r)
    if (100 * r >= std::size_t(p) * v.size()) return v[r - 1];
  return v.back();
}

void criterion_10() {
  std::mt19937_64 rng(20260815);
  std::uniform_real_distribution<double> dist(-1e3, 1e3);
  bool ok = true;
  std::string why;

  std::vector<double> big(1000);
  for (double& x : big) x = dist(rng);
  const SampleSummary s = summarize(big);
  if (s.median != oracle_percentile(big, 50) ||
      s.q25_lo != oracle_percentile(big, 25) ||
      s.q25_hi != oracle_percentile(big, 75) ||
      s.q45_lo != oracle_percentile(big, 5) ||
      s.q45_hi != oracle_percentile(big, 95)) {
    ok = false;
    why = "1000-sample summary differs from the sort oracle";
  }

  int band_sets = 0;
  std::uniform_int_distribution<int> len(1, 100);
  for (int rep = 0; rep < 200 && ok; ++rep) {
    std::vector<double> v(std::size_t(len(rng)));
    for (double& x : v) x = dist(rng);
    const SampleSummary b = summarize(v);
    if (!(b.q45_lo <= b.q25_lo && b.q25_lo <= b.median &&
          b.median <= b.q25_hi && b.q25_hi <= b.q45_hi)) {
      ok = false;
      why = "band ordering violated on set " + std::to_string(rep);
    }
    ++band_sets;
  }
  report(10, "summary-stats-vs-sort-oracle", ok,
         ok ? "1000-sample nearest-rank summary exact; band ordering held on " +
                  std::to_string(band_sets) + " random sets"
            : why);
}

// ---- 11: affinity replay preserves the locality fraction ----------------------

void criterion_11() {
  const BlockSet bs = big_blocks();
  const Machine m = load_preset("istanbul");
  const ThreadMap tm = default_thread_map(m);
  const OwnerMap om =
      assign_owners(bs, PlacementPolicy::first_touch(), m, tm);
  const SchedulerMode lq = SchedulerMode::locality_queues(256, SubmitOrder::kji);

  const ScheduleTrace first = make_schedule(bs, om, lq, m, tm);
  const double f1 = local_traffic_fraction(first, om, tm, bs);

  const SchedulerMode replay = SchedulerMode::replay(
      std::make_shared<TaskAffinity>(record_affinity(first)), SubmitOrder::kji);
  const ScheduleTrace second = make_schedule(bs, om, replay, m, tm);
  const double f2 = local_traffic_fraction(second, om, tm, bs);

  const bool ok = f1 == f2 && f1 > 0.9;
  report(11, "affinity-replay-preserves-locality", ok,
         "recorded local fraction " + fmt(f1) + ", replayed " + fmt(f2));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
