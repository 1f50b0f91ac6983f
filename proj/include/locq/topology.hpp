#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace locq {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hardware data recorded alongside a machine. Kept for reference only;
/// the cost model never reads it.
struct MachineInfo {
  std::string cpu;
  double frequency_ghz = 0.0;
  double l1_kb = 0.0;
  double l2_kb = 0.0;
  double l3_mb = 0.0;
  std::string interconnect;
  bool nt_stream = false;  // stream numbers were taken with nontemporal stores
};

/// A ccNUMA machine: locality domains (LDs), cores, and bandwidth parameters.
struct Machine {
  std::string name;
  int n_ld = 1;            // locality domains
  int cores_per_ld = 1;    // threads per domain
  double bw_ld = 0.0;      // local memory bandwidth per LD [bytes/s]
  double bw_link = 0.0;    // inter-LD link bandwidth [bytes/s]
  double remote_penalty = 1.0;  // factor >= 1 applied to remote bus traffic
  std::optional<double> bw_system;  // measured full-system bandwidth, if known
  std::optional<MachineInfo> info;

  int n_threads() const { return n_ld * cores_per_ld; }
};

/// Throws TopologyError if any Machine invariant is violated.
void validate(const Machine& m);

/// Blocked thread -> LD mapping: each LD gets cores_per_ld consecutive
/// thread ids.
struct ThreadMap {
  std::vector<int> ld_of;
  int n_ld = 1;

  int n_threads() const { return static_cast<int>(ld_of.size()); }
};

/// Thread t maps to LD t / cores_per_ld.
ThreadMap default_thread_map(const Machine& m);

/// Names of the bundled machine presets.
std::vector<std::string> preset_names();

/// Resolves, in order: a file named <name>.json under $LOCQ_TOPOLOGY_DIR,
/// a bundled preset, then `name` interpreted as a path to a topology file.
Machine load_preset(const std::string& name);

Machine machine_from_json_file(const std::string& path);
Machine machine_from_json(const std::string& text, const std::string& origin);

/// Derives a machine with `threads` total threads from `m`, keeping as many
/// locality domains as divide the thread count evenly.
Machine with_thread_count(Machine m, int threads);

}  // namespace locq
