#include "weaklab/harness/run.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "weaklab/bohm/trajectories.hpp"
#include "weaklab/common/errors.hpp"
#include "weaklab/harness/validation.hpp"
#include "weaklab/intrinsics/current.hpp"
#include "weaklab/intrinsics/dwell.hpp"
#include "weaklab/intrinsics/work.hpp"
#include "weaklab/measure/protocol.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/weakval/weakval.hpp"

namespace weaklab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const RunManifest& m) {
  return {{"config_hash", m.config_hash}, {"seed", m.seed},       {"tool_version", m.tool_version},
          {"task", m.task},               {"outputs", m.outputs}, {"wall_clock_s", m.wall_clock_s},
          {"metrics", m.metrics},         {"passed", m.passed}};
}

fs::path resolve_out_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "weaklab-out";
}

namespace {

// Output files are written into a sibling staging directory and moved to
// the real one on commit. The destructor discards uncommitted work.
class Staging {
 public:
  explicit Staging(fs::path out) : out_(fs::absolute(std::move(out)).lexically_normal()) {
    if (out_.filename().empty()) out_ = out_.parent_path();
    if (fs::exists(out_) && !fs::is_directory(out_))
      throw ConfigError("output path " + out_.string() + " exists and is not a directory");
    static std::atomic<unsigned> counter{0};
    fs::create_directories(out_.parent_path());
    dir_ = out_.parent_path() / ("." + out_.filename().string() + ".staging-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    if (!committed_) fs::remove_all(dir_, ec);
  }

  std::ofstream open(const std::string& name) {
    names_.push_back(name);
    std::ofstream f(dir_ / name);
    if (!f) throw Error("cannot write " + (dir_ / name).string());
    f << std::scientific;
    f.precision(kCsvPrecision);
    return f;
  }

  void commit() {
    fs::create_directories(out_);
    for (const auto& n : names_) fs::rename(dir_ / n, out_ / n);
    fs::remove_all(dir_);
    committed_ = true;
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path out_, dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

struct Context {
  const ScenarioConfig& cfg;
  Staging& out;
  RunManifest& manifest;
  qgrid::Grid1D grid;
  qgrid::Physics phys;
  qgrid::PotentialModel pot;
  qgrid::Propagator prop;
  qgrid::WaveFunction psi0;

  explicit Context(const ScenarioConfig& c, Staging& s, RunManifest& m)
      : cfg(c),
        out(s),
        manifest(m),
        grid(make_grid(c)),
        phys(make_physics(c)),
        pot(make_potential(c)),
        prop(grid, phys, pot, make_propagator_config(c)),
        psi0(make_initial_state(c)) {}

  qgrid::Evolution evolve() const { return prop.evolve(psi0, cfg.propagator.duration); }
  std::uint64_t seed() const { return cfg.ensemble.seed; }
  std::size_t N() const { return cfg.ensemble.N; }
  json& metrics() { return manifest.metrics; }

  bohm::TrajectoryEnsemble trajectories(const qgrid::Evolution& evo, std::size_t substeps = 1) const {
    const auto starts = bohm::sample_initial_positions(evo.frame(0), N(), seed());
    return bohm::integrate_trajectories(evo, starts, seed(), {substeps});
  }
  double system_energy(const qgrid::WaveFunction& psi) const {
    return qgrid::expectation(qgrid::build_hamiltonian(grid, pot, psi.time, phys, false), psi);
  }
};

void task_propagate(Context& c) {
  const auto evo = c.evolve();
  auto dens = c.out.open("density.csv");
  auto norm = c.out.open("norm.csv");
  dens << "t,x,density\n";
  norm << "t,norm,norm_drift\n";
  double drift = 0;
  for (std::size_t k = 0; k < evo.size(); ++k) {
    const auto f = evo.frame(k);
    const auto rho = f.density();
    for (std::size_t j = 0; j < c.grid.n(); ++j) dens << evo.times[k] << ',' << c.grid.x(j) << ',' << rho[j] << '\n';
    const double n = f.norm2();
    drift = std::max(drift, std::abs(n - 1.0));
    norm << evo.times[k] << ',' << n << ',' << n - 1.0 << '\n';
  }
  const auto last = evo.frame(evo.size() - 1);
  c.metrics() = {{"frames", evo.size()},
                 {"max_norm_drift", drift},
                 {"energy_initial", c.system_energy(evo.frame(0))},
                 {"energy_final", c.system_energy(last)},
                 {"mean_x_final", qgrid::expectation(qgrid::SpectralOperator::position(c.grid), last)}};
}

void task_trajectories(Context& c) {
  const auto evo = c.evolve();
  const auto ens = c.trajectories(evo, c.cfg.task.trajectories.substeps);
  auto tf = c.out.open("trajectories.csv");
  bohm::write_csv(ens, tf);
  auto ef = c.out.open("equivariance.csv");
  ef << "t,l1\n";
  double worst = 0;
  for (std::size_t k = 0; k < evo.size(); ++k) {
    const double l1 = bohm::equivariance_l1(evo.frame(k), ens.positions_at(k));
    worst = std::max(worst, l1);
    ef << evo.times[k] << ',' << l1 << '\n';
  }
  c.metrics() = {{"N", ens.size()},
                 {"frames", evo.size()},
                 {"max_l1", worst},
                 {"truncated", ens.truncated_count()},
                 {"non_crossing", bohm::non_crossing(ens)}};
}

void task_weakvalue(Context& c) {
  const auto& t = c.cfg.task.weakvalue;
  const auto psi = c.prop.propagate(c.psi0, t.time);
  qgrid::SpectralOperator op = qgrid::SpectralOperator::position(c.grid);
  if (t.op == "momentum")
    op = qgrid::SpectralOperator::momentum(c.grid, c.phys);
  else if (t.op == "energy")
    op = qgrid::build_hamiltonian(c.grid, c.pot, t.time, c.phys, false);
  else if (t.op == "window")
    op = qgrid::SpectralOperator::window(c.grid, t.a, t.b);
  auto f = c.out.open("weakvalue.csv");
  weakval::write_weak_value_csv(weakval::weak_value_field(op, psi), f);
  const auto xs = bohm::sample_initial_positions(psi, c.N(), c.seed());
  const auto avg = weakval::ensemble_weak_average(op, psi, xs);
  c.metrics() = {{"operator", op.label()},
                 {"time", psi.time},
                 {"expectation", qgrid::expectation(op, psi)},
                 {"quadrature_average", weakval::weak_average_quadrature(op, psi)},
                 {"ensemble_mean", avg.mean},
                 {"ensemble_std_error", avg.std_error},
                 {"ensemble_used", avg.used},
                 {"ensemble_skipped", avg.skipped}};
}

void task_work(Context& c) {
  const auto& t = c.cfg.task.work;
  const double t2 = t.t2.value_or(c.cfg.propagator.duration);
  const auto evo = c.evolve();
  const auto ens = c.trajectories(evo);
  const auto recs = intrinsics::work_records(evo, ens, t.t1, t2);
  const auto d = intrinsics::work_distribution(recs);
  auto rf = c.out.open("work.csv");
  rf << "experiment_id,E_initial,E_final,work,flagged\n";
  for (const auto& r : recs)
    rf << r.experiment_id << ',' << r.E_initial << ',' << r.E_final << ',' << r.work << ',' << (r.flagged ? 1 : 0)
       << '\n';
  auto df = c.out.open("work_distribution.csv");
  df << "bin_left,bin_right,probability\n";
  for (std::size_t i = 0; i < d.probabilities.size(); ++i)
    df << d.bin_edges[i] << ',' << d.bin_edges[i + 1] << ',' << d.probabilities[i] << '\n';
  const double dH = c.system_energy(evo.frame(evo.index_of(t2))) - c.system_energy(evo.frame(evo.index_of(t.t1)));
  c.metrics() = {{"N", d.N},           {"flagged", d.flagged},     {"mean", d.mean},
                 {"variance", d.variance}, {"std_error", d.std_error}, {"binned_mean", d.binned_mean},
                 {"delta_H", dH},       {"bins", d.probabilities.size()}};
}

void task_dwell(Context& c) {
  const auto& t = c.cfg.task.dwell;
  const bool strict = t.horizon_policy == "require_exit";
  const auto policy = strict ? intrinsics::HorizonPolicy::require_exit : intrinsics::HorizonPolicy::truncate;
  const auto evo = c.evolve();
  const auto ens = c.trajectories(evo);
  const auto traj = intrinsics::dwell_time_ensemble(ens, t.a, t.b, policy);
  const auto dens = intrinsics::dwell_time_density(evo, t.a, t.b, strict);
  const auto op = weakval::dwell_operator_field(evo, c.prop, t.a, t.b, strict);
  auto f = c.out.open("dwell.csv");
  f << "experiment_id,x0,dwell_time,weak_value\n";
  double disc_mean = 0, disc_max = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& tr = ens.trajectories[i];
    const double wv = op.field.at(tr.positions[0], qgrid::NodePolicy::clamp);
    const double d = std::abs(traj.per_trajectory[i] - wv);
    disc_mean += d / static_cast<double>(ens.size());
    disc_max = std::max(disc_max, d);
    f << tr.experiment_id << ',' << tr.positions[0] << ',' << traj.per_trajectory[i] << ',' << wv << '\n';
  }
  c.metrics() = {{"trajectory_mean", traj.mean},
                 {"trajectory_std_error", traj.std_error},
                 {"density", dens.value},
                 {"density_richardson_rel", dens.richardson_rel},
                 {"operator_expectation", op.expectation},
                 {"operator_richardson_rel", op.richardson_rel},
                 {"final_mass", dens.final_mass},
                 {"pointwise_discrepancy_mean", disc_mean},
                 {"pointwise_discrepancy_max", disc_max}};
}

void task_psd(Context& c) {
  const auto& t = c.cfg.task.psd;
  const auto evo = c.evolve();
  const bohm::VelocityCache vel(evo);
  const auto starts = bohm::sample_initial_positions(c.psi0, c.N(), c.seed());
  const auto ens = bohm::integrate_trajectories(vel, starts, c.seed());
  const auto tr = intrinsics::current_traces(vel, ens, {t.length, c.phys.charge}, evo.index_of(t.t_start),
                                             evo.size() - 1);
  const auto p = intrinsics::psd(tr.currents, evo.dt_out(), t.max_lag, t.hann);
  auto f = c.out.open("psd.csv");
  intrinsics::write_psd_csv(p, f);
  auto cf = c.out.open("correlation.csv");
  cf << "lag,correlation\n";
  for (std::size_t m = 0; m < p.lags.size(); ++m) cf << p.lags[m] << ',' << p.correlation[m] << '\n';
  c.metrics() = {{"psd0", p.values[t.max_lag]},
                 {"tau_max", p.tau_max},
                 {"trace_length", tr.currents.empty() ? 0 : tr.currents.front().size()},
                 {"flagged", tr.flagged}};
}

qgrid::SpectralOperator named_operator(const Context& c, const std::string& name) {
  if (name == "momentum") return qgrid::SpectralOperator::momentum(c.grid, c.phys);
  if (name == "energy") return qgrid::build_hamiltonian(c.grid, c.pot, 0.0, c.phys, false);
  return qgrid::SpectralOperator::position(c.grid);
}

void task_measure(Context& c) {
  const auto& t = c.cfg.task.measure;
  auto p = measure::make_protocol(named_operator(c, t.S), named_operator(c, t.G),
                                  measure::evolution_map(c.prop, t.tau), measure::AncillaModel::make(1, 1, 1));
  const auto probe = measure::premeasure(c.psi0, p.S_spec, p.ancilla);
  double smax = 0;
  for (double s : probe.eigenvalues) smax = std::max(smax, std::abs(s));
  p.ancilla = measure::AncillaModel::make(t.sigma, t.lambda, smax);
  const std::size_t a = measure::post_selection_index(p.G_spec, t.post_selection);

  const double exact = measure::operational_weak_value_exact(c.psi0, p, a);
  const cplx aav = measure::aav_reference(c.psi0, p, a);
  json m = {{"mode", t.mode},
            {"post_selected_eigenvalue", p.G_spec.eigenvalues()[a]},
            {"s_absmax", smax},
            {"sigma", p.ancilla.sigma},
            {"lambda", p.ancilla.lambda},
            {"exact", exact},
            {"aav_re", aav.real()},
            {"aav_im", aav.imag()}};
  if (t.mode == "monte_carlo") {
    auto log = c.out.open("experiments.jsonl");
    log << std::defaultfloat;
    const auto mc = measure::operational_weak_value_mc(c.psi0, p, a, c.N(), c.seed(), &log);
    m.update({{"value", mc.value},
              {"std_error", mc.std_error},
              {"N", mc.n},
              {"n_post", mc.n_post},
              {"post_fraction", mc.post_fraction}});
  } else {
    auto jf = c.out.open("joint.csv");
    measure::write_joint_csv(measure::two_time_joint(c.psi0, p), jf);
    m["value"] = exact;
  }
  auto sf = c.out.open("estimator.json");
  sf << m.dump(2) << '\n';
  c.metrics() = m;
}

void task_validate(Context& c) {
  ValidationOptions opt;
  opt.criteria = c.cfg.task.validate.criteria;
  for (const auto& [k, v] : c.cfg.task.validate.tolerance_scale) opt.tolerance_scale[std::stoi(k)] = v;
  opt.seed = c.seed();
  const auto results = validate_all(opt);
  const json report = report_json(results);
  auto f = c.out.open("report.json");
  f << report.dump(2) << '\n';
  json failed = json::array();
  for (const auto& r : results)
    if (!r.pass) failed.push_back(r.id);
  c.metrics() = {{"criteria", results.size()}, {"failed", failed}};
  c.manifest.passed = failed.empty();
}

}  // namespace

RunManifest run(const ScenarioConfig& cfg, const fs::path& out_dir) {
  validate(cfg);
  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.seed = cfg.ensemble.seed;
  m.task = cfg.task.name;
  Staging out(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Context c(cfg, out, m);
    const auto& n = cfg.task.name;
    if (n == "propagate") task_propagate(c);
    else if (n == "trajectories") task_trajectories(c);
    else if (n == "weakvalue") task_weakvalue(c);
    else if (n == "work") task_work(c);
    else if (n == "dwell") task_dwell(c);
    else if (n == "psd") task_psd(c);
    else if (n == "measure") task_measure(c);
    else task_validate(c);
  } catch (const ConfigError& e) {
    std::vector<std::string> v;
    for (const auto& s : e.violations()) v.push_back("task '" + cfg.task.name + "': " + s);
    throw ConfigError(v);
  } catch (const NumericError& e) {
    throw NumericError("task '" + cfg.task.name + "': " + e.what());
  }
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    auto cf = out.open("config.json");
    cf << serialize(cfg);
  }
  m.outputs = out.names();
  {
    auto mf = out.open("manifest.json");
    mf << std::defaultfloat << to_json(m).dump(2) << '\n';
  }
  out.commit();
  return m;
}

}  // namespace weaklab::harness
