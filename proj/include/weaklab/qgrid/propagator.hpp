#pragma once

#include <cstddef>
#include <vector>

#include "weaklab/qgrid/operator.hpp"
#include "weaklab/qgrid/potential.hpp"
#include "weaklab/qgrid/wavefunction.hpp"

namespace weaklab::qgrid {

enum class Method { split_operator, crank_nicolson };

struct PropagatorConfig {
  double dt = 0.01;
  Method method = Method::split_operator;
  std::size_t steps_per_output = 1;
};

// Stored sequence of states on a uniform time axis (two-pass design:
// propagate once, then reuse for trajectories and weak values).
struct Evolution {
  Grid1D grid;
  Physics physics;
  PotentialModel potential;
  RVec times;
  std::vector<CVec> frames;
  std::size_t steps_per_frame = 1;  // propagator steps between stored frames

  std::size_t size() const noexcept { return frames.size(); }
  double dt_out() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  WaveFunction frame(std::size_t k) const { return WaveFunction(grid, frames[k], times[k]); }
  // Index of the stored frame at time t; throws if t is not on the axis.
  std::size_t index_of(double t) const;
  // Every `stride`-th frame, keeping the first.
  Evolution strided(std::size_t stride) const;
};

// Unitary time stepping.
//
// Split-operator: Strang splitting V/2, T, V/2 with V taken at the step
// midpoint; exact for V = 0 with spectral kinetics.
// Crank-Nicolson: (1 + i h H/2hbar) psi' = (1 - i h H/2hbar) psi with H at the
// step midpoint. Stencil kinetics give a cyclic tridiagonal system; spectral
// kinetics are solved by a Fourier-preconditioned fixed-point iteration.
//
// A negative duration runs the exact inverse of the forward steps.
class Propagator {
 public:
  Propagator(Grid1D g, Physics phys, PotentialModel pot, PropagatorConfig cfg);

  const PropagatorConfig& config() const noexcept { return cfg_; }
  const Grid1D& grid() const noexcept { return grid_; }
  const Physics& physics() const noexcept { return phys_; }
  const PotentialModel& potential() const noexcept { return pot_; }

  WaveFunction propagate(const WaveFunction& psi, double duration) const;
  // Same, with an explicit step count (used to retrace stored frames exactly).
  WaveFunction propagate(const WaveFunction& psi, double duration, std::size_t steps) const;
  // Frames every steps_per_output steps from psi.time to psi.time + duration.
  Evolution evolve(const WaveFunction& psi, double duration) const;

 private:
  void run(CVec& psi, double t0, double h, std::size_t steps, double norm0) const;

  Grid1D grid_;
  Physics phys_;
  PotentialModel pot_;
  PropagatorConfig cfg_;
};

// Number of steps of size at most dt covering |duration|.
std::size_t step_count(double duration, double dt);

}  // namespace weaklab::qgrid
