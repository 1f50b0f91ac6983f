#include "locq/topology.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace locq {

namespace {

using nlohmann::json;

Machine istanbul_preset() {
  Machine m;
  m.name = "istanbul";
  m.n_ld = 4;
  m.cores_per_ld = 6;
  m.bw_ld = 9.9e9;
  m.bw_link = 9.9e9;
  m.remote_penalty = 1.25;
  m.bw_system = 38.6e9;
  m.info = MachineInfo{"Opteron 8431", 2.41, 64, 512, 5, "HyperTransport",
                       true};
  return m;
}

Machine nehalem_ep_preset() {
  Machine m;
  m.name = "nehalem-ep";
  m.n_ld = 2;
  m.cores_per_ld = 4;
  m.bw_ld = 18.9e9;
  m.bw_link = 18.9e9;
  m.remote_penalty = 1.5;  // strongest bandwidth reduction for nonlocal access
  m.bw_system = 36.6e9;
  m.info = MachineInfo{"Xeon X5550", 2.66, 32, 256, 8, "QuickPath", true};
  return m;
}

Machine nehalem_ex_preset() {
  Machine m;
  m.name = "nehalem-ex";
  m.n_ld = 4;
  m.cores_per_ld = 8;
  // Half the memory boards per socket on the test system; the measured
  // number is stored as-is.
  m.bw_ld = 8.15e9;
  m.bw_link = 8.15e9;
  m.remote_penalty = 1.25;
  m.bw_system = 33.4e9;
  m.info = MachineInfo{"Xeon X7560", 2.27, 32, 256, 24, "QuickPath", false};
  return m;
}

Machine parse_machine(const json& j, const std::string& origin) {
  Machine m;
  try {
    m.name = j.at("name").get<std::string>();
    m.n_ld = j.at("n_ld").get<int>();
    m.cores_per_ld = j.at("cores_per_ld").get<int>();
    m.bw_ld = j.at("bw_ld").get<double>();
    m.bw_link = j.value("bw_link", m.bw_ld);
    m.remote_penalty = j.value("remote_penalty", 1.0);
    if (j.contains("bw_system")) m.bw_system = j.at("bw_system").get<double>();
    if (j.contains("info")) {
      const json& i = j.at("info");
      MachineInfo info;
      info.cpu = i.value("cpu", "");
      info.frequency_ghz = i.value("frequency_ghz", 0.0);
      info.l1_kb = i.value("l1_kb", 0.0);
      info.l2_kb = i.value("l2_kb", 0.0);
      info.l3_mb = i.value("l3_mb", 0.0);
      info.interconnect = i.value("interconnect", "");
      info.nt_stream = i.value("nt_stream", false);
      m.info = info;
    }
  } catch (const json::exception& e) {
    throw TopologyError(origin + ": " + e.what());
  }
  validate(m);
  return m;
}

}  // namespace

void validate(const Machine& m) {
  std::ostringstream bad;
  if (m.n_ld < 1) bad << "n_ld must be >= 1 (got " << m.n_ld << "); ";
  if (m.cores_per_ld < 1)
    bad << "cores_per_ld must be >= 1 (got " << m.cores_per_ld << "); ";
  if (!(m.bw_ld > 0)) bad << "bw_ld must be > 0 (got " << m.bw_ld << "); ";
  if (!(m.bw_link > 0))
    bad << "bw_link must be > 0 (got " << m.bw_link << "); ";
  if (!(m.remote_penalty >= 1))
    bad << "remote_penalty must be >= 1 (got " << m.remote_penalty << "); ";
  const std::string msg = bad.str();
  if (!msg.empty())
    throw TopologyError("invalid machine '" + m.name + "': " + msg);
}

ThreadMap default_thread_map(const Machine& m) {
  ThreadMap tm;
  tm.n_ld = m.n_ld;
  tm.ld_of.resize(m.n_threads());
  for (int t = 0; t < m.n_threads(); ++t) tm.ld_of[t] = t / m.cores_per_ld;
  return tm;
}

std::vector<std::string> preset_names() {
  return {"istanbul", "nehalem-ep", "nehalem-ex"};
}

Machine machine_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw TopologyError(origin + ": " + e.what());
  }
  return parse_machine(j, origin);
}

Machine machine_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return machine_from_json(buf.str(), path);
}

Machine load_preset(const std::string& name) {
  if (const char* dir = std::getenv("LOCQ_TOPOLOGY_DIR")) {
    const auto candidate = std::filesystem::path(dir) / (name + ".json");
    if (std::filesystem::exists(candidate))
      return machine_from_json_file(candidate.string());
  }
  if (name == "istanbul") return istanbul_preset();
  if (name == "nehalem-ep") return nehalem_ep_preset();
  if (name == "nehalem-ex") return nehalem_ex_preset();
  if (std::filesystem::exists(name)) return machine_from_json_file(name);
  std::string known;
  for (const auto& p : preset_names()) known += " " + p;
  throw TopologyError("unknown topology '" + name + "'; presets:" + known +
                      "; or pass a JSON file path (searched "
                      "$LOCQ_TOPOLOGY_DIR first)");
}

Machine with_thread_count(Machine m, int threads) {
  if (threads < 1)
    throw TopologyError("thread count must be >= 1 (got " +
                        std::to_string(threads) + ")");
  if (threads == m.n_threads()) return m;
  int ld = std::min(m.n_ld, threads);
  while (threads % ld != 0) --ld;
  m.n_ld = ld;
  m.cores_per_ld = threads / ld;
  m.bw_system.reset();  // no longer the measured full-system figure
  validate(m);
  return m;
}

}  // namespace locq
