#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/parallel.hpp"
#include "weaklab/harness/run.hpp"

namespace {

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kNumericError = 3 };

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw weaklab::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace weaklab;

  CLI::App app{"weaklab: trajectory-based weak values and measurement protocols"};
  app.set_version_flag("--version", std::string(harness::kToolVersion));
  app.require_subcommand(1);

  std::optional<std::string> config_path, out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  for (const auto& name : harness::task_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " task");
    sub->add_option("--config", config_path, "scenario JSON; defaults apply to missing keys");
    sub->add_option("--seed", seed, "master seed, overrides ensemble.seed");
    sub->add_option("--out", out, std::string("output directory (else $") + harness::kOutDirEnv + ", else ./weaklab-out)");
    sub->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  const std::string task = app.get_subcommands().front()->get_name();
  try {
    auto cfg = harness::parse_config(config_path ? read_file(*config_path) : "{}");
    cfg.task.name = task;
    if (seed) cfg.ensemble.seed = *seed;
    harness::validate(cfg);
    if (threads > 0) set_thread_count(threads);

    const auto dir = harness::resolve_out_dir(out);
    const auto m = harness::run(cfg, dir);
    std::cout << harness::to_json(m).dump(2) << '\n';
    std::cerr << "wrote " << m.outputs.size() + 1 << " files to " << dir.string() << '\n';
    return m.passed ? kOk : kValidationFailed;
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config error: " << v << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  }
}
