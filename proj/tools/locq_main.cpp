#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "locq/executor.hpp"
#include "locq/grid.hpp"
#include "locq/kernels.hpp"
#include "locq/placement.hpp"
#include "locq/scheduler.hpp"
#include "locq/simulator.hpp"
#include "locq/stats.hpp"
#include "locq/topology.hpp"

namespace {

using namespace locq;

struct Config {
  std::string topology = "istanbul";
  std::string grid = "240x60x60";
  std::string block = "10x10x60";
  bool full_scale = false;
  std::string placement = "first-touch:static";
  std::string init;        // overrides the placement's init schedule
  std::string init_order;  // overrides the placement's init order
  std::string mode = "static-chunk";
  int cap = 256;
  std::string order = "ijk";
  std::string nt_stores = "on";
  int threads = 0;  // 0 keeps the preset's full thread count
  int samples = 5;
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 42;
  std::string kernel = "auto";
  bool pin = false;
  double watchdog_s = 60.0;
  int inject_stall_ms = 0;
  int stall_thread = 0;
};

struct Dims {
  int i, j, k;
};

Dims parse_dims(const std::string& s, const std::string& flag) {
  Dims d{};
  char x1, x2;
  std::istringstream in(s);
  if (!(in >> d.i >> x1 >> d.j >> x2 >> d.k) || x1 != 'x' || x2 != 'x' ||
      !(in >> std::ws).eof())
    throw CLI::ValidationError(flag, "expected IxJxK, got '" + s + "'");
  return d;
}

LoopSchedule parse_init(const std::string& s) {
  if (s == "s" || s == "static") return LoopSchedule::static_chunk;
  if (s == "s-1" || s == "static-1" || s == "static,1" || s == "static-cyclic")
    return LoopSchedule::static_cyclic;
  throw CLI::ValidationError("--init", "expected s|static|s-1|static-cyclic, "
                                       "got '" + s + "'");
}

PlacementPolicy parse_placement(const Config& cfg) {
  std::vector<std::string> parts;
  std::stringstream ss(cfg.placement);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty())
    throw CLI::ValidationError("--placement", "empty value");
  PlacementPolicy p;
  if (parts[0] == "sequential")
    p = PlacementPolicy::sequential();
  else if (parts[0] == "interleave")
    p = PlacementPolicy::interleave();
  else if (parts[0] == "first-touch")
    p = PlacementPolicy::first_touch();
  else
    throw CLI::ValidationError(
        "--placement", "expected sequential|interleave|first-touch[:init"
                       "[:order]], got '" + cfg.placement + "'");
  if (parts.size() > 1) p.init_schedule = parse_init(parts[1]);
  if (parts.size() > 2) p.init_order = submit_order_from_string(parts[2]);
  if (parts.size() > 3)
    throw CLI::ValidationError("--placement",
                               "too many ':' parts in '" + cfg.placement +
                               "'");
  if (!cfg.init.empty()) p.init_schedule = parse_init(cfg.init);
  if (!cfg.init_order.empty())
    p.init_order = submit_order_from_string(cfg.init_order);
  return p;
}

SchedulerMode::Kind parse_mode(const std::string& s) {
  if (s == "static" || s == "static-chunk")
    return SchedulerMode::Kind::static_chunk;
  if (s == "static-cyclic") return SchedulerMode::Kind::static_cyclic;
  if (s == "dynamic") return SchedulerMode::Kind::dynamic_pool;
  if (s == "tasking") return SchedulerMode::Kind::tasking_capped;
  if (s == "locality-queues") return SchedulerMode::Kind::locality_queues;
  throw CLI::ValidationError("--mode",
                             "expected static-chunk|static-cyclic|dynamic|"
                             "tasking|locality-queues, got '" + s + "'");
}

TrafficModel parse_traffic(const std::string& s) {
  if (s == "on") return TrafficModel::nontemporal();
  if (s == "off") return TrafficModel::write_allocate();
  throw CLI::ValidationError("--nt-stores", "expected on|off, got '" + s +
                                            "'");
}

// One output row; optionals stay empty in the CSV and null in the JSON.
struct Row {
  std::string policy;
  std::string init;
  std::string order;
  std::string mode;
  std::optional<int> cap;
  double local_fraction = 0;
  double pred_mlups = 0;
  std::optional<double> measured_mlups;
  std::optional<double> median, q25_lo, q25_hi, q45_lo, q45_hi;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

constexpr const char* kCsvHeader =
    "policy,init,order,mode,cap,local_fraction,pred_mlups,measured_mlups,"
    "median,q25_lo,q25_hi,q45_lo,q45_hi";

void write_csv(const std::vector<Row>& rows, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const Row& r : rows) {
    os << r.policy << ',' << r.init << ',' << r.order << ',' << r.mode << ',';
    if (r.cap) os << *r.cap;
    os << ',' << fmt(r.local_fraction) << ',' << fmt(r.pred_mlups) << ',';
    if (r.measured_mlups) os << fmt(*r.measured_mlups);
    os << ',';
    if (r.median) os << fmt(*r.median);
    os << ',';
    if (r.q25_lo) os << fmt(*r.q25_lo);
    os << ',';
    if (r.q25_hi) os << fmt(*r.q25_hi);
    os << ',';
    if (r.q45_lo) os << fmt(*r.q45_lo);
    os << ',';
    if (r.q45_hi) os << fmt(*r.q45_hi);
    os << '\n';
  }
}

void write_json(const std::vector<Row>& rows, std::ostream& os) {
  auto arr = nlohmann::json::array();
  for (const Row& r : rows) {
    nlohmann::json j;
    j["policy"] = r.policy;
    j["init"] = r.init;
    j["order"] = r.order;
    j["mode"] = r.mode;
    j["cap"] = r.cap ? nlohmann::json(*r.cap) : nlohmann::json(nullptr);
    j["local_fraction"] = r.local_fraction;
    j["pred_mlups"] = r.pred_mlups;
    auto opt = [](const std::optional<double>& v) {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j["measured_mlups"] = opt(r.measured_mlups);
    j["median"] = opt(r.median);
    j["q25_lo"] = opt(r.q25_lo);
    j["q25_hi"] = opt(r.q25_hi);
    j["q45_lo"] = opt(r.q45_lo);
    j["q45_hi"] = opt(r.q45_hi);
    arr.push_back(std::move(j));
  }
  os << arr.dump(2) << '\n';
}

void emit(const Config& cfg, const std::vector<Row>& rows) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!cfg.out.empty()) {
    file.open(cfg.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open --out '" + cfg.out + "'");
    os = &file;
  }
  if (cfg.format == "csv")
    write_csv(rows, *os);
  else if (cfg.format == "json")
    write_json(rows, *os);
  else
    throw CLI::ValidationError("--format", "expected csv|json, got '" +
                                           cfg.format + "'");
}

struct Experiment {
  Machine machine;
  ThreadMap tmap;
  Dims grid, block;
  BlockSet bs;
  PlacementPolicy policy;
  SchedulerMode mode;
  TrafficModel traffic;
};

Experiment build(const Config& cfg) {
  Machine m = load_preset(cfg.topology);
  if (cfg.threads > 0) m = with_thread_count(m, cfg.threads);
  const Dims g = cfg.full_scale ? Dims{2400, 600, 600}
                                 : parse_dims(cfg.grid, "--grid");
  const Dims b = cfg.full_scale ? Dims{100, 10, 600}
                                 : parse_dims(cfg.block, "--block");
  BlockSet bs(g.i, g.j, g.k, {b.i, b.j, b.k});
  SchedulerMode mode;
  mode.kind = parse_mode(cfg.mode);
  mode.cap = cfg.cap;
  mode.order = submit_order_from_string(cfg.order);
  return {m,  default_thread_map(m), g, b, std::move(bs),
          parse_placement(cfg), mode, parse_traffic(cfg.nt_stores)};
}

Row simulate_row(const Experiment& ex, const PlacementPolicy& policy,
                 const SchedulerMode& mode, const TrafficModel& traffic) {
  const OwnerMap om = assign_owners(ex.bs, policy, ex.machine, ex.tmap);
  const ScheduleTrace tr =
      make_schedule(ex.bs, om, mode, ex.machine, ex.tmap);
  const SimReport rep =
      simulate_sweep(tr, om, ex.machine, ex.tmap, traffic, ex.bs);
  Row row;
  row.policy = to_string(policy.kind);
  if (policy.kind == PlacementPolicy::Kind::first_touch)
    row.init = policy.init_schedule == LoopSchedule::static_chunk ? "s" : "s-1";
  row.order = to_string(mode.order);
  row.mode = to_string(mode.kind);
  if (mode.kind == SchedulerMode::Kind::tasking_capped ||
      mode.kind == SchedulerMode::Kind::locality_queues)
    row.cap = mode.cap;
  row.local_fraction = rep.local_fraction;
  row.pred_mlups = rep.mlups;
  return row;
}

int cmd_simulate(const Config& cfg) {
  const Experiment ex = build(cfg);
  emit(cfg, {simulate_row(ex, ex.policy, ex.mode, ex.traffic)});
  return 0;
}

int cmd_run(const Config& cfg) {
  const Experiment ex = build(cfg);
  if (cfg.kernel != "auto") {
    const auto v = kernels::variant_from_string(cfg.kernel);
    if (!v)
      throw CLI::ValidationError("--kernel", "expected scalar|avx2|neon|auto,"
                                             " got '" + cfg.kernel + "'");
    kernels::force_variant(*v);
  }
  Row row = simulate_row(ex, ex.policy, ex.mode, ex.traffic);

  Field src(ex.grid.i, ex.grid.j, ex.grid.k);
  src.fill_random(cfg.seed);
  Field dst(ex.grid.i, ex.grid.j, ex.grid.k);
  const OwnerMap om = assign_owners(ex.bs, ex.policy, ex.machine, ex.tmap);
  ExecOptions opt;
  opt.watchdog_s = cfg.watchdog_s;
  opt.pin_threads = cfg.pin;
  opt.inject_stall_ms = cfg.inject_stall_ms;
  opt.stall_thread = cfg.stall_thread;
  const std::vector<RunLog> logs =
      run_parallel(src, dst, ex.bs, om, ex.mode, ex.machine, ex.tmap,
                   cfg.samples, opt);

  std::vector<double> mlups;
  double sum = 0;
  for (const RunLog& log : logs) {
    const double v = double(ex.bs.total_sites()) * 1e3 / double(log.wall_ns);
    mlups.push_back(v);
    sum += v;
  }
  const SampleSummary s = summarize(mlups);
  row.measured_mlups = sum / double(mlups.size());
  row.median = s.median;
  row.q25_lo = s.q25_lo;
  row.q25_hi = s.q25_hi;
  row.q45_lo = s.q45_lo;
  row.q45_hi = s.q45_hi;
  emit(cfg, {row});
  std::cerr << "validation PASS: " << cfg.samples
            << " sample(s), every sweep bitwise-equal to the serial "
               "reference ("
            << kernels::variant_name(kernels::active_variant())
            << " kernel, " << ex.machine.n_threads() << " threads)\n";
  return 0;
}

int cmd_sweep(const Config& cfg) {
  const Experiment ex = build(cfg);
  std::vector<Row> rows;
  const SubmitOrder io = ex.policy.init_order;
  const auto chunk = SchedulerMode::static_chunk(SubmitOrder::ijk);
  rows.push_back(simulate_row(ex, PlacementPolicy::sequential(), chunk,
                              ex.traffic));
  rows.push_back(simulate_row(ex, PlacementPolicy::interleave(), chunk,
                              ex.traffic));
  rows.push_back(simulate_row(
      ex, PlacementPolicy::first_touch(LoopSchedule::static_chunk, io), chunk,
      ex.traffic));
  for (const auto kind : {SchedulerMode::Kind::tasking_capped,
                          SchedulerMode::Kind::locality_queues})
    for (const auto sched :
         {LoopSchedule::static_chunk, LoopSchedule::static_cyclic})
      for (const auto order : {SubmitOrder::ijk, SubmitOrder::kji}) {
        SchedulerMode mode;
        mode.kind = kind;
        mode.cap = cfg.cap;
        mode.order = order;
        rows.push_back(simulate_row(
            ex, PlacementPolicy::first_touch(sched, io), mode, ex.traffic));
      }
  emit(cfg, rows);
  return 0;
}

void add_common(CLI::App* app, Config& cfg) {
  app->add_option("--topology", cfg.topology,
                  "Machine preset name or topology JSON path");
  app->add_option("--grid", cfg.grid, "Grid extents IxJxK");
  app->add_option("--block", cfg.block, "Block extents IxJxK");
  app->add_flag("--full-scale", cfg.full_scale,
                "Use the large 2400x600x600 grid with 100x10x600 blocks");
  app->add_option("--placement", cfg.placement,
                  "sequential | interleave | first-touch[:init[:order]]");
  app->add_option("--init", cfg.init,
                  "Init-loop schedule: s|static or s-1|static-cyclic");
  app->add_option("--init-order", cfg.init_order,
                  "Init-loop linearization: ijk|kji");
  app->add_option("--mode", cfg.mode,
                  "static-chunk | static-cyclic | dynamic | tasking | "
                  "locality-queues");
  app->add_option("--cap", cfg.cap, "Pending-task cap for the capped modes");
  app->add_option("--order", cfg.order, "Task submit order: ijk|kji");
  app->add_option("--nt-stores", cfg.nt_stores,
                  "Nontemporal stores in the traffic model: on|off");
  app->add_option("--threads", cfg.threads,
                  "Total threads (0 = preset's full count)");
  app->add_option("--format", cfg.format, "Output format: csv|json");
  app->add_option("--out", cfg.out, "Write output here instead of stdout");
  app->add_option("--seed", cfg.seed, "Seed for randomized field contents");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locality-queue scheduling testbed: blocked 3D Jacobi sweeps "
               "on modeled ccNUMA machines"};
  app.require_subcommand(1);
  Config cfg;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Predict one configuration with the bandwidth model");
  add_common(sim, cfg);

  CLI::App* run = app.add_subcommand(
      "run", "Execute real-thread sweeps and report measured statistics");
  add_common(run, cfg);
  run->add_option("--samples", cfg.samples, "Sweeps to execute and summarize");
  run->add_option("--kernel", cfg.kernel,
                  "Sweep kernel variant: scalar|avx2|neon|auto");
  run->add_flag("--pin", cfg.pin, "Best-effort thread pinning");
  run->add_option("--watchdog-s", cfg.watchdog_s,
                  "Per-sweep watchdog timeout in seconds");
  run->add_option("--inject-stall-ms", cfg.inject_stall_ms,
                  "Fault injection: stall one thread this long before work");
  run->add_option("--stall-thread", cfg.stall_thread,
                  "Thread id the injected stall applies to");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Predict the full baseline/tasking/locality-queue matrix");
  add_common(sweep, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
