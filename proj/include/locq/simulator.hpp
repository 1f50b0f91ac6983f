#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "locq/placement.hpp"
#include "locq/scheduler.hpp"
#include "locq/topology.hpp"

namespace locq {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Main-memory bytes per site update: 8 load + 8 store with nontemporal
/// stores, plus 8 for the write-allocate transfer without them.
struct TrafficModel {
  int bytes_per_site = 16;

  static TrafficModel nontemporal() { return {16}; }
  static TrafficModel write_allocate() { return {24}; }
};

/// Bandwidth-bottleneck prediction for one scheduled sweep.
struct SimReport {
  std::vector<double> bus_bytes;  // per-LD, remote-penalty surcharge included
  std::map<std::pair<int, int>, double> link_bytes;  // unordered LD pair
  double total_bytes = 0;   // raw task bytes, no surcharge
  long total_sites = 0;
  double local_fraction = 0;  // share of bytes served from the consumer's LD
  double time_s = 0;          // max over buses and links of bytes / capacity
  double mlups = 0;           // million site updates per second
  double predicted_bw = 0;    // total_bytes / time_s, kept exact when the
                              // buses are perfectly balanced
};

/// Charges every executed task's bytes to its owner LD's bus (times
/// remote_penalty when the consumer sits in another LD, which also charges
/// the owner<->consumer link) and takes the most loaded resource as the
/// sweep bottleneck.
SimReport simulate_sweep(const ScheduleTrace& trace, const OwnerMap& om,
                         const Machine& m, const ThreadMap& tm,
                         const TrafficModel& traffic, const BlockSet& bs);

/// Fraction of task bytes whose consumer LD equals the owner LD.
double local_traffic_fraction(const ScheduleTrace& trace, const OwnerMap& om,
                              const ThreadMap& tm, const BlockSet& bs);

/// (n_ld * bw_ld) / recorded full-system bandwidth. Ratios below 1 flag
/// sub-linear bandwidth scaling. Throws SimError when the machine carries no
/// recorded system bandwidth.
double bandwidth_scaling_ratio(const Machine& m);

std::string report_to_json(const SimReport& r, const Machine& m);

}  // namespace locq
