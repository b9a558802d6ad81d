#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/parallel.hpp"
#include "weaklab/harness/run.hpp"
#include "weaklab/harness/validation.hpp"

using namespace weaklab;
using namespace weaklab::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("weaklab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

const char* kFullMeasure = R"({
  "units": {"hbar": 1, "mass": 1, "charge": 1},
  "grid": {"x_min": -8, "x_max": 8, "n": 64, "kinetic": "spectral"},
  "potential": {"kind": "harmonic", "omega": 1.0, "center": 0.25,
                "drive": {"amplitude": 0.1, "omega": 0.5, "phase": 0.3, "t_on": 0.0, "t_off": 2.0}},
  "initial_state": {"kind": "superposition",
                    "components": [{"index": 0, "re": 1, "im": 0}, {"index": 1, "re": 0.2, "im": 0.6}]},
  "propagator": {"method": "crank_nicolson", "dt": 0.005, "steps_per_output": 2, "duration": 1.5},
  "ensemble": {"N": 1000, "seed": 42},
  "task": {"name": "measure", "S": "energy", "G": "position", "lambda": 0.5, "sigma": 3.0,
           "tau": 0.7, "post_selection": 0.25, "mode": "monte_carlo"}
})";

// Small measurement scenario: momentum premeasured, position post-selected.
ScenarioConfig small_measure(const std::string& mode) {
  auto cfg = parse_config(R"({
    "grid": {"x_min": -8, "x_max": 8, "n": 64},
    "potential": {"kind": "harmonic", "omega": 1.0},
    "initial_state": {"kind": "gaussian", "x0": -0.5, "sigma0": 0.8, "k0": 0.7},
    "propagator": {"dt": 0.01},
    "ensemble": {"N": 1000, "seed": 7},
    "task": {"name": "measure", "S": "momentum", "G": "position", "lambda": 1.0, "sigma": 2.0,
             "tau": 0.5, "post_selection": 0.0}
  })");
  cfg.task.measure.mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("minimal config is parsed with defaults filled") {
  const auto cfg = parse_config(R"({"initial_state": {"kind": "gaussian", "sigma0": 1.5}})");
  CHECK(cfg.task.name == "propagate");
  CHECK(cfg.grid.n == 512);
  CHECK(cfg.grid.x_min == -32.0);
  CHECK(cfg.potential.kind == "free");
  CHECK(cfg.initial_state.sigma0 == 1.5);
  CHECK(cfg.initial_state.k0 == 0.0);
  CHECK(cfg.units.hbar == 1.0);
  CHECK(cfg.ensemble.seed == 1);
  CHECK(parse_config("{}").propagator.method == "split_operator");
}

TEST_CASE("negative sigma0 is one violation naming the field") {
  const auto v = violations_of(R"({"initial_state": {"sigma0": -1}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("initial_state.sigma0") != std::string::npos);
}

TEST_CASE("unknown key reports the nearest valid key") {
  const auto v = violations_of(R"({"grid": {"x_maxx": 3}})");
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("grid.x_maxx") != std::string::npos);
  CHECK(v[0].find("'x_max'") != std::string::npos);
  CHECK(edit_distance("x_mxa", "x_max") == 2);
  CHECK(edit_distance("", "abc") == 3);
}

TEST_CASE("all violations are reported, not just the first") {
  const auto v = violations_of(R"({
    "units": {"mass": 0},
    "grid": {"n": 1, "typo": 1},
    "propagator": {"dt": -0.1},
    "task": {"name": "nonsense"}
  })");
  CHECK(v.size() >= 4);
  auto mentions = [&](const std::string& s) {
    for (const auto& m : v)
      if (m.find(s) != std::string::npos) return true;
    return false;
  };
  CHECK(mentions("units.mass"));
  CHECK(mentions("grid.typo"));
  CHECK(mentions("propagator.dt"));
  CHECK(mentions("task.name"));
}

TEST_CASE("full measure config round-trips byte-identically") {
  const auto cfg = parse_config(kFullMeasure);
  const std::string once = serialize(cfg);
  const std::string twice = serialize(parse_config(once));
  CHECK(once == twice);
  CHECK(cfg.potential.drive.has_value());
  CHECK(cfg.potential.drive->t_off.value() == 2.0);
  CHECK(cfg.initial_state.components.size() == 2);
  CHECK(cfg.task.measure.S == "energy");
  CHECK(cfg.task.measure.mode == "monte_carlo");
}

TEST_CASE("config hash is stable under re-serialization and key order") {
  const auto a = parse_config(R"({"grid": {"n": 128, "x_min": -10, "x_max": 10}, "ensemble": {"seed": 3}})");
  const auto b = parse_config(R"({"ensemble": {"seed": 3},
                                  "grid": {"x_max": 10.0, "x_min": -10.0, "n": 128}})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) == config_hash(parse_config(serialize(a))));
  CHECK(config_hash(a).size() == 64);
  auto c = a;
  c.ensemble.seed = 4;
  CHECK(config_hash(a) != config_hash(c));
  // SHA-256 of the empty string
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("propagate writes density frames and a norm log listed in the manifest") {
  TempDir tmp;
  auto cfg = parse_config(R"({"grid": {"x_min": -16, "x_max": 16, "n": 128},
                              "propagator": {"dt": 0.01, "steps_per_output": 10, "duration": 0.5}})");
  const auto out = tmp.path / "prop";
  const auto m = run(cfg, out);
  CHECK(m.task == "propagate");
  CHECK(m.config_hash == config_hash(cfg));
  CHECK(m.tool_version == std::string(kToolVersion));
  for (const auto& f : m.outputs) CHECK(fs::exists(out / f));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(m.metrics["frames"].get<std::size_t>() == 6);
  CHECK(m.metrics["max_norm_drift"].get<double>() < 1e-12);

  std::ifstream dens(out / "density.csv");
  std::string line;
  std::getline(dens, line);
  CHECK(line == "t,x,density");
  std::size_t rows = 0;
  while (std::getline(dens, line)) ++rows;
  CHECK(rows == 6 * 128);

  const auto man = json::parse(slurp(out / "manifest.json"));
  CHECK(man["config_hash"] == m.config_hash);
  CHECK(man["outputs"].size() == m.outputs.size());
  CHECK(parse_config(slurp(out / "config.json")).grid.n == 128);
}

TEST_CASE("identical config and seed give bit-identical outputs") {
  TempDir tmp;
  auto cfg = parse_config(R"({"grid": {"x_min": -16, "x_max": 16, "n": 128},
                              "initial_state": {"k0": 0.5},
                              "propagator": {"dt": 0.01, "steps_per_output": 5, "duration": 0.5},
                              "ensemble": {"N": 200, "seed": 11}})");
  for (const std::string task : {"trajectories", "work"}) {
    cfg.task.name = task;
    const auto m1 = run(cfg, tmp.path / (task + "_a"));
    const auto m2 = run(cfg, tmp.path / (task + "_b"));
    REQUIRE(m1.outputs == m2.outputs);
    for (const auto& f : m1.outputs) {
      CAPTURE(f);
      CHECK(slurp(tmp.path / (task + "_a") / f) == slurp(tmp.path / (task + "_b") / f));
    }
    CHECK(m1.metrics == m2.metrics);
  }
  auto other = cfg;
  other.ensemble.seed = 12;
  run(other, tmp.path / "work_c");
  CHECK(slurp(tmp.path / "work_a" / "work.csv") != slurp(tmp.path / "work_c" / "work.csv"));
}

TEST_CASE("outputs do not depend on the worker count") {
  TempDir tmp;
  auto cfg = parse_config(R"({"grid": {"x_min": -16, "x_max": 16, "n": 128},
                              "propagator": {"dt": 0.01, "steps_per_output": 5, "duration": 0.5},
                              "ensemble": {"N": 300, "seed": 5},
                              "task": {"name": "trajectories"}})");
  const auto before = thread_count();
  set_thread_count(1);
  run(cfg, tmp.path / "one");
  set_thread_count(4);
  run(cfg, tmp.path / "four");
  set_thread_count(before);
  CHECK(slurp(tmp.path / "one" / "trajectories.csv") == slurp(tmp.path / "four" / "trajectories.csv"));
}

TEST_CASE("a failed run leaves no output files and names the task") {
  TempDir tmp;
  // Window far from the packet's exit: trajectories are still inside at T.
  auto cfg = parse_config(R"({"grid": {"x_min": -16, "x_max": 16, "n": 128},
                              "propagator": {"dt": 0.01, "duration": 0.2},
                              "ensemble": {"N": 100},
                              "task": {"name": "dwell", "a": -1, "b": 1}})");
  const auto out = tmp.path / "dwell";
  bool threw = false;
  try {
    run(cfg, out);
  } catch (const NumericError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("task 'dwell'") != std::string::npos);
  }
  CHECK(threw);
  CHECK_FALSE(fs::exists(out));
  CHECK(fs::is_empty(tmp.path));

  cfg.task.dwell.horizon_policy = "truncate";
  const auto m = run(cfg, out);
  CHECK(fs::exists(out / "dwell.csv"));
  CHECK(m.metrics["trajectory_mean"].get<double>() > 0);
}

TEST_CASE("measure task: Monte Carlo with N = 1000 agrees with exact mode") {
  TempDir tmp;
  const auto exact = run(small_measure("exact"), tmp.path / "exact");
  const auto mc = run(small_measure("monte_carlo"), tmp.path / "mc");
  CHECK(fs::exists(tmp.path / "exact" / "joint.csv"));
  CHECK(fs::exists(tmp.path / "mc" / "estimator.json"));

  const double v_exact = exact.metrics["value"].get<double>();
  const double v_mc = mc.metrics["value"].get<double>();
  const double se = mc.metrics["std_error"].get<double>();
  CHECK(mc.metrics["exact"].get<double>() == doctest::Approx(v_exact).epsilon(1e-12));
  CHECK(se > 0);
  CHECK(std::abs(v_mc - v_exact) < 4 * se);

  std::ifstream log(tmp.path / "mc" / "experiments.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(log, line)) {
    if (n == 0) CHECK(json::parse(line).is_object());
    ++n;
  }
  CHECK(n == 1000);
}

TEST_CASE("output directory precedence: flag, then environment, then default") {
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir(std::nullopt) == fs::path("weaklab-out"));
  ::setenv(kOutDirEnv, "/tmp/from-env", 1);
  CHECK(resolve_out_dir(std::nullopt) == fs::path("/tmp/from-env"));
  CHECK(resolve_out_dir(std::string("mine")) == fs::path("mine"));
  ::unsetenv(kOutDirEnv);
}

TEST_CASE("zero tolerance scale fails only the tampered criterion") {
  ValidationOptions base;
  base.criteria = {1, 6};
  const auto clean = validate_all(base);
  REQUIRE(clean.size() == 2);
  CHECK(clean[0].pass);
  CHECK(clean[1].pass);

  auto tampered = base;
  tampered.tolerance_scale[6] = 0.0;
  const auto t = validate_all(tampered);
  CHECK(t[0].pass);
  CHECK_FALSE(t[1].pass);
  for (std::size_t i = 0; i < clean[0].checks.size(); ++i)
    CHECK(t[0].checks[i].measured == clean[0].checks[i].measured);
}

TEST_CASE("report JSON schema is stable across runs") {
  ValidationOptions opt;
  opt.criteria = {6};
  auto strip = [](json j) {
    for (auto& c : j["criteria"]) c.erase("runtime_s");
    return j;
  };
  const auto a = report_json(validate_all(opt));
  const auto b = report_json(validate_all(opt));
  CHECK(strip(a) == strip(b));
  for (const char* k : {"all_pass", "count", "criteria"}) CHECK(a.contains(k));
  const auto& c = a["criteria"][0];
  for (const char* k : {"id", "title", "pass", "runtime_s", "checks", "details"}) CHECK(c.contains(k));
  for (const char* k : {"name", "measured", "target", "tolerance", "relation", "pass"})
    CHECK(c["checks"][0].contains(k));
}

TEST_CASE("validate task records pass state in the manifest") {
  TempDir tmp;
  auto cfg = parse_config(R"({"task": {"name": "validate", "criteria": [6]}})");
  CHECK(run(cfg, tmp.path / "ok").passed);
  cfg.task.validate.tolerance_scale["6"] = 0.0;
  const auto m = run(cfg, tmp.path / "bad");
  CHECK_FALSE(m.passed);
  const auto report = json::parse(slurp(tmp.path / "bad" / "report.json"));
  CHECK(report["all_pass"] == false);
}
