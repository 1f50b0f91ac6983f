#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "locq/grid.hpp"
#include "locq/placement.hpp"
#include "locq/scheduler.hpp"
#include "locq/topology.hpp"

namespace locq {

class ExecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExecOptions {
  double watchdog_s = 60.0;  // per-sweep deadlock watchdog
  bool pin_threads = false;  // best-effort thread->core pinning
  int inject_stall_ms = 0;   // fault injection: stall_thread sleeps this long
  int stall_thread = 0;      //   before doing any work (tests the watchdog)
};

struct TaskRecord {
  Block block;
  int thread;
  std::int64_t start_ns;  // relative to sweep start
  std::int64_t stop_ns;
};

/// Evidence record of one real-thread sweep.
struct RunLog {
  std::vector<TaskRecord> records;  // covers every block exactly once
  std::int64_t wall_ns = 0;
  std::vector<long> tasks_per_thread;
};

/// Runs `samples` full sweeps src -> dst with n_ld * cores_per_ld real
/// threads under the mode's concurrent semantics. After every sample, dst is
/// compared bitwise against the serial reference sweep; a mismatch or a
/// watchdog timeout throws ExecError. Returns one RunLog per sample.
std::vector<RunLog> run_parallel(const Field& src, Field& dst,
                                 const BlockSet& bs, const OwnerMap& om,
                                 const SchedulerMode& mode, const Machine& m,
                                 const ThreadMap& tm, int samples,
                                 const ExecOptions& opt = {});

enum class PinResult { applied, unsupported };
const char* to_string(PinResult r);

/// Best-effort pinning of the calling thread to a core. Degrades to a no-op
/// returning `unsupported` where affinity control is unavailable;
/// correctness never depends on it.
PinResult pin_hint(int core_id);

/// CPU the calling thread runs on, or -1 when unqueryable.
int current_cpu();

/// CSV: thread,block_ib,block_jb,block_kb,start_ns,stop_ns
void write_runlog_csv(const RunLog& log, std::ostream& os);
std::string runlog_to_json(const RunLog& log);

}  // namespace locq
