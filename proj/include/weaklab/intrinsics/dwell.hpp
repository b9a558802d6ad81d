#pragma once

#include "weaklab/bohm/trajectories.hpp"

namespace weaklab::intrinsics {

// What to do with a trajectory that is still inside the region at the
// horizon: raise HorizonError, or count the time up to the horizon.
enum class HorizonPolicy { require_exit, truncate };

// Time spent in [a, b], with positions taken linear between frames so the
// crossing instants are resolved inside each interval.
double dwell_time_trajectory(const bohm::Trajectory& tr, double a, double b,
                             HorizonPolicy policy = HorizonPolicy::require_exit);

struct DwellEnsemble {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  RVec per_trajectory;
};

// Throws HorizonError carrying the number of offending trajectories.
DwellEnsemble dwell_time_ensemble(const bohm::TrajectoryEnsemble& ens, double a, double b,
                                  HorizonPolicy policy = HorizonPolicy::require_exit);

struct DwellDensity {
  double value = 0.0;           // trapezoid in t, exact piecewise-linear integral in x
  double value_half = 0.0;      // frames 2*dt_out apart
  double richardson_rel = 0.0;  // |value - value_half| / |value|
  double final_mass = 0.0;      // mass inside [a, b] at the horizon
};

DwellDensity dwell_time_density(const qgrid::Evolution& evo, double a, double b, bool check_horizon = true);

}  // namespace weaklab::intrinsics
