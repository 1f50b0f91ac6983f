#include "locq/simulator.hpp"

#include <json.hpp>

namespace locq {

SimReport simulate_sweep(const ScheduleTrace& trace, const OwnerMap& om,
                         const Machine& m, const ThreadMap& tm,
                         const TrafficModel& traffic, const BlockSet& bs) {
  if (trace.execs.empty()) throw SimError("empty schedule");
  if (tm.n_threads() < trace.n_threads)
    throw SimError("trace names more threads than the thread map");
  if (om.n_ld != m.n_ld) throw SimError("owner map does not match machine");

  const double bytes_per_task =
      double(bs.sites_per_block()) * traffic.bytes_per_site;
  SimReport r;
  r.bus_bytes.assign(std::size_t(m.n_ld), 0.0);
  double local_bytes = 0.0;
  for (const ExecRecord& e : trace.execs) {
    const int owner = om.of(bs.index_of(e.block));
    const int consumer = tm.ld_of[std::size_t(e.thread)];
    if (consumer == owner) {
      r.bus_bytes[std::size_t(owner)] += bytes_per_task;
      local_bytes += bytes_per_task;
    } else {
      r.bus_bytes[std::size_t(owner)] += bytes_per_task * m.remote_penalty;
      r.link_bytes[{std::min(owner, consumer), std::max(owner, consumer)}] +=
          bytes_per_task;
    }
  }
  r.total_bytes = bytes_per_task * double(trace.execs.size());
  r.total_sites = bs.sites_per_block() * long(trace.execs.size());
  r.local_fraction = local_bytes / r.total_bytes;

  // Bottleneck resource = the one that takes longest to drain its bytes.
  double bottleneck_bytes = r.bus_bytes[0];
  double bottleneck_cap = m.bw_ld;
  double worst = bottleneck_bytes / bottleneck_cap;
  for (std::size_t ld = 1; ld < r.bus_bytes.size(); ++ld) {
    const double t = r.bus_bytes[ld] / m.bw_ld;
    if (t > worst) {
      worst = t;
      bottleneck_bytes = r.bus_bytes[ld];
      bottleneck_cap = m.bw_ld;
    }
  }
  for (const auto& [pair, bytes] : r.link_bytes) {
    const double t = bytes / m.bw_link;
    if (t > worst) {
      worst = t;
      bottleneck_bytes = bytes;
      bottleneck_cap = m.bw_link;
    }
  }
  r.time_s = worst;
  // total/bottleneck first: with perfectly balanced buses that quotient is a
  // small exact integer, so the product reproduces n_ld * bw_ld exactly.
  r.predicted_bw = (r.total_bytes / bottleneck_bytes) * bottleneck_cap;
  r.mlups = double(r.total_sites) / r.time_s / 1e6;
  return r;
}

double local_traffic_fraction(const ScheduleTrace& trace, const OwnerMap& om,
                              const ThreadMap& tm, const BlockSet& bs) {
  if (trace.execs.empty()) throw SimError("empty schedule");
  long local = 0;
  for (const ExecRecord& e : trace.execs)
    if (tm.ld_of[std::size_t(e.thread)] == om.of(bs.index_of(e.block)))
      ++local;
  return double(local) / double(trace.execs.size());
}

double bandwidth_scaling_ratio(const Machine& m) {
  if (!m.bw_system)
    throw SimError("machine '" + m.name +
                   "' records no full-system bandwidth");
  return double(m.n_ld) * m.bw_ld / *m.bw_system;
}

std::string report_to_json(const SimReport& r, const Machine& m) {
  nlohmann::json j;
  j["machine"] = m.name;
  j["bus_bytes"] = r.bus_bytes;
  auto links = nlohmann::json::array();
  for (const auto& [pair, bytes] : r.link_bytes)
    links.push_back({{"ld_a", pair.first}, {"ld_b", pair.second},
                     {"bytes", bytes}});
  j["link_bytes"] = links;
  j["total_bytes"] = r.total_bytes;
  j["total_sites"] = r.total_sites;
  j["local_fraction"] = r.local_fraction;
  j["time_s"] = r.time_s;
  j["mlups"] = r.mlups;
  j["predicted_bw"] = r.predicted_bw;
  return j.dump(2);
}

}  // namespace locq
