#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weaklab/qgrid/potential.hpp"
#include "weaklab/qgrid/propagator.hpp"
#include "weaklab/qgrid/wavefunction.hpp"

namespace weaklab::harness {

inline constexpr const char* kToolVersion = "0.3.0";

struct UnitsSpec {
  double hbar = 1.0;
  double mass = 1.0;
  double charge = 1.0;
};

struct GridSpec {
  double x_min = -32.0;
  double x_max = 32.0;
  std::size_t n = 512;
  std::string kinetic = "spectral";  // spectral | stencil
};

struct DriveSpec {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double t_on = 0.0;
  std::optional<double> t_off;  // absent: never switched off
};

struct PotentialSpec {
  std::string kind = "free";  // free | barrier | harmonic
  double height = 0.0, left = 0.0, right = 0.0;
  double omega = 1.0, center = 0.0;
  std::optional<DriveSpec> drive;
};

struct Component {
  std::size_t index = 0;
  double re = 1.0, im = 0.0;
};

struct InitialStateSpec {
  std::string kind = "gaussian";  // gaussian | eigenstate | superposition
  double x0 = 0.0, sigma0 = 1.0, k0 = 0.0;
  std::size_t index = 0;
  std::vector<Component> components;
};

struct PropagatorSpec {
  std::string method = "split_operator";  // split_operator | crank_nicolson
  double dt = 0.01;
  std::size_t steps_per_output = 1;
  double duration = 1.0;
};

struct EnsembleSpec {
  std::size_t N = 1000;
  std::uint64_t seed = 1;
};

struct TrajectoriesTask {
  std::size_t substeps = 1;
};

struct WeakValueTask {
  std::string op = "momentum";  // momentum | position | energy | window
  double a = 0.0, b = 0.0;      // window only
  double time = 0.0;            // frame at which the weak value is evaluated
};

struct WorkTask {
  double t1 = 0.0;
  std::optional<double> t2;  // defaults to the end of the run
};

struct DwellTask {
  double a = 0.0, b = 1.0;
  std::string horizon_policy = "require_exit";  // require_exit | truncate
};

struct PsdTask {
  double length = 1.0;
  std::size_t max_lag = 32;
  bool hann = false;
  double t_start = 0.0;
};

struct MeasureTask {
  std::string S = "momentum";  // position | momentum | energy
  std::string G = "position";
  double lambda = 1.0;
  double sigma = 10.0;
  double tau = 1.0;  // duration of the evolution between the measurements
  double post_selection = 0.0;
  std::string mode = "exact";  // exact | monte_carlo
};

struct ValidateTask {
  std::vector<int> criteria;                  // empty: all
  std::map<std::string, double> tolerance_scale;  // criterion id -> factor
};

struct TaskSpec {
  std::string name = "propagate";
  TrajectoriesTask trajectories;
  WeakValueTask weakvalue;
  WorkTask work;
  DwellTask dwell;
  PsdTask psd;
  MeasureTask measure;
  ValidateTask validate;
};

struct ScenarioConfig {
  UnitsSpec units;
  GridSpec grid;
  PotentialSpec potential;
  InitialStateSpec initial_state;
  PropagatorSpec propagator;
  EnsembleSpec ensemble;
  TaskSpec task;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"propagate", "trajectories", "weakvalue", "work",
                                              "dwell",     "psd",          "measure",   "validate"};
  return names;
}

// Throws ConfigError listing every violation.
ScenarioConfig parse_config(const std::string& text);
// Normalized JSON: sorted keys, defaults filled, only the keys the chosen
// kinds use.
std::string serialize(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);  // SHA-256 of serialize()
std::string sha256_hex(const std::string& data);

// Re-checks a config assembled in code; same messages as parse_config.
void validate(const ScenarioConfig& cfg);

// Physical objects described by a config.
qgrid::Physics make_physics(const ScenarioConfig& cfg);
qgrid::Grid1D make_grid(const ScenarioConfig& cfg);
qgrid::PotentialModel make_potential(const ScenarioConfig& cfg);
qgrid::PropagatorConfig make_propagator_config(const ScenarioConfig& cfg);
qgrid::WaveFunction make_initial_state(const ScenarioConfig& cfg);

std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace weaklab::harness
