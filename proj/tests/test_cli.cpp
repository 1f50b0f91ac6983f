#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader =
    "policy,init,order,mode,cap,local_fraction,pred_mlups,measured_mlups,"
    "median,q25_lo,q25_hi,q45_lo,q45_hi";

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("locq_cli_test_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI through the shell; `env_prefix` lets a test export variables
// for just that invocation (e.g. "LOCQ_TOPOLOGY_DIR=/x ").
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out" + std::to_string(counter));
  const fs::path err = scratch_dir() / ("err" + std::to_string(counter));
  ++counter;
  const std::string cmd = env_prefix + "\"" + LOCQ_CLI_PATH + "\" " + args +
                          " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Column indices in the CSV schema.
constexpr int kPolicy = 0, kInit = 1, kMode = 3, kCap = 4, kLocal = 5,
              kPred = 6, kMeasured = 7, kMedian = 8;

}  // namespace

TEST_CASE("simulate emits the CSV schema with a fully local first touch") {
  const CliResult r = run_cli("simulate");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kHeader);
  const auto f = fields_of(lines[1]);
  REQUIRE(f.size() == 13);
  CHECK(f[kPolicy] == "first-touch");
  CHECK(f[kInit] == "s");
  CHECK(f[kMode] == "static-chunk");
  CHECK(f[kCap] == "");       // no cap outside the capped modes
  CHECK(f[kLocal] == "1");    // chunked first touch is fully local
  CHECK(f[kMeasured] == "");  // simulate never executes
  CHECK(f[kMedian] == "");
}

TEST_CASE("predicted rates order the placement policies") {
  const auto pred = [](const std::string& placement) {
    const CliResult r = run_cli("simulate --placement " + placement);
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    return std::stod(fields_of(lines[1])[kPred]);
  };
  const double seq = pred("sequential");
  const double il = pred("interleave");
  const double ft = pred("first-touch:static");
  CHECK(seq < il);
  CHECK(il < ft);
}

TEST_CASE("a block size that does not divide the grid is rejected") {
  const CliResult r = run_cli("simulate --block 7x10x60");
  CHECK(r.code != 0);
  CHECK(r.err.find("divide") != std::string::npos);
}

TEST_CASE("run executes, validates, and reports measured statistics") {
  const CliResult r = run_cli(
      "run --grid 24x12x12 --block 4x4x12 --threads 4 --samples 3 "
      "--mode locality-queues --cap 5 --seed 7");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("validation PASS") != std::string::npos);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  const auto f = fields_of(lines[1]);
  REQUIRE(f.size() == 13);
  CHECK(f[kMode] == "locality-queues");
  CHECK(f[kCap] == "5");
  CHECK_FALSE(f[kMeasured].empty());
  CHECK_FALSE(f[kMedian].empty());
  CHECK(std::stod(f[kMeasured]) > 0);
}

TEST_CASE("run works single threaded") {
  const CliResult r = run_cli(
      "run --grid 12x12x12 --block 4x4x12 --threads 1 --samples 2");
  CHECK(r.code == 0);
  CHECK(r.err.find("validation PASS") != std::string::npos);
}

TEST_CASE("an injected stall trips the watchdog") {
  const CliResult r = run_cli(
      "run --grid 12x12x12 --block 4x4x12 --threads 2 --samples 1 "
      "--mode locality-queues --inject-stall-ms 2000 --stall-thread 1 "
      "--watchdog-s 0.1");
  CHECK(r.code == 1);
  CHECK(r.err.find("watchdog") != std::string::npos);
}

TEST_CASE("sweep prints the full policy matrix") {
  const CliResult r = run_cli("sweep");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 12);  // header + 3 baselines + 8 capped rows
  CHECK(lines[0] == kHeader);
  for (const std::string& l : lines) CHECK(fields_of(l).size() == 13);
  CHECK(fields_of(lines[1])[kPolicy] == "sequential");
  CHECK(fields_of(lines[2])[kPolicy] == "interleave");
  for (std::size_t i = 3; i < lines.size(); ++i)
    CHECK(fields_of(lines[i])[kPolicy] == "first-touch");
  // Rows 4..11 pair tasking then locality-queues with s/s-1 and ijk/kji.
  CHECK(fields_of(lines[4])[kMode] == "tasking");
  CHECK(fields_of(lines[8])[kMode] == "locality-queues");
  CHECK(fields_of(lines[4])[kCap] == "256");
}

TEST_CASE("a single-domain topology flattens every placement to the same rate") {
  const fs::path uma = scratch_dir() / "uma.json";
  std::ofstream(uma) << R"({"name":"uma","n_ld":1,"cores_per_ld":4,)"
                     << R"("bw_ld":1.0e10,"remote_penalty":1.25})";
  std::string first;
  for (const std::string placement :
       {"sequential", "interleave", "first-touch:static"}) {
    const CliResult r = run_cli("simulate --topology " + uma.string() +
                                " --placement " + placement);
    REQUIRE(r.code == 0);
    const auto f = fields_of(lines_of(r.out)[1]);
    CHECK(f[kLocal] == "1");
    if (first.empty())
      first = f[kPred];
    else
      CHECK(f[kPred] == first);
  }
}

TEST_CASE("LOCQ_TOPOLOGY_DIR shadows the bundled presets") {
  const fs::path dir = scratch_dir() / "topos";
  fs::create_directories(dir);
  // Same shape as the bundled istanbul but ten times slower buses.
  std::ofstream(dir / "istanbul.json")
      << R"({"name":"istanbul","n_ld":4,"cores_per_ld":6,)"
      << R"("bw_ld":9.9e8,"remote_penalty":1.25})";
  const CliResult plain = run_cli("simulate");
  const CliResult shadowed =
      run_cli("simulate", "LOCQ_TOPOLOGY_DIR=" + dir.string() + " ");
  REQUIRE(plain.code == 0);
  REQUIRE(shadowed.code == 0);
  const double p = std::stod(fields_of(lines_of(plain.out)[1])[kPred]);
  const double s = std::stod(fields_of(lines_of(shadowed.out)[1])[kPred]);
  CHECK(s < p);
  CHECK(s * 10 == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("simulate and sweep are byte-reproducible") {
  const CliResult a = run_cli("simulate --placement interleave");
  const CliResult b = run_cli("simulate --placement interleave");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const CliResult c = run_cli("sweep --topology nehalem-ep");
  const CliResult d = run_cli("sweep --topology nehalem-ep");
  REQUIRE(c.code == 0);
  CHECK(c.out == d.out);
}

TEST_CASE("JSON output parses and mirrors the CSV fields") {
  const CliResult r = run_cli("simulate --format json");
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["policy"] == "first-touch");
  CHECK(j[0]["local_fraction"].get<double>() == 1.0);
  CHECK(j[0]["measured_mlups"].is_null());
  CHECK(j[0]["cap"].is_null());
}

TEST_CASE("--out writes the same bytes a stdout run produces") {
  const fs::path out = scratch_dir() / "row.csv";
  const CliResult file_run =
      run_cli("simulate --placement interleave --out " + out.string());
  REQUIRE(file_run.code == 0);
  CHECK(file_run.out.empty());
  const CliResult stdout_run = run_cli("simulate --placement interleave");
  CHECK(slurp(out) == stdout_run.out);
}

TEST_CASE("kernel selection is validated") {
  const CliResult ok = run_cli(
      "run --grid 12x12x12 --block 4x4x12 --threads 2 --samples 1 "
      "--kernel scalar");
  CHECK(ok.code == 0);
  const CliResult bad = run_cli(
      "run --grid 12x12x12 --block 4x4x12 --threads 2 --samples 1 "
      "--kernel bogus");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("--kernel") != std::string::npos);
}

TEST_CASE("a subcommand is required") {
  const CliResult r = run_cli("");
  CHECK(r.code != 0);
}

TEST_CASE("unknown preset names fail with the available ones listed") {
  const CliResult r = run_cli("simulate --topology atlantis");
  CHECK(r.code == 1);
  CHECK(r.err.find("istanbul") != std::string::npos);
}
