#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "weaklab/bohm/trajectories.hpp"
#include "weaklab/qgrid/field.hpp"

namespace weaklab::intrinsics {

using bohm::Trajectory;
using bohm::TrajectoryEnsemble;
using qgrid::Evolution;

// Local energies Re[H psi/psi] of stored frames, built on first use.
class LocalEnergyFrames {
 public:
  explicit LocalEnergyFrames(const Evolution& evo);
  const qgrid::GridField& at(std::size_t frame) const;
  const Evolution& evolution() const noexcept { return *evo_; }

 private:
  const Evolution* evo_;
  mutable std::vector<std::unique_ptr<qgrid::GridField>> cache_;
};

struct WorkRecord {
  std::size_t experiment_id = 0;
  double E_initial = 0.0;
  double E_final = 0.0;
  double work = 0.0;  // E_final - E_initial
  bool flagged = false;
};

WorkRecord work_per_experiment(const LocalEnergyFrames& energies, const Trajectory& tr, double t1, double t2);
WorkRecord work_per_experiment(const Evolution& evo, const Trajectory& tr, double t1, double t2);
std::vector<WorkRecord> work_records(const Evolution& evo, const TrajectoryEnsemble& ens, double t1, double t2);

struct WorkDistribution {
  RVec bin_edges;
  RVec probabilities;
  std::size_t N = 0;        // records used
  std::size_t flagged = 0;  // records excluded
  double mean = 0.0;        // unbinned
  double variance = 0.0;    // unbinned
  double std_error = 0.0;
  double binned_mean = 0.0;
};

// Freedman-Diaconis histogram. Spreads below `resolution` collapse to one
// bin at the mean.
WorkDistribution work_distribution(const std::vector<WorkRecord>& records, double resolution = 1e-8);

struct PowerBalance {
  double dE_dt = 0.0;        // d/dt [m v^2/2 + Q + V] along the trajectory
  double drive_power = 0.0;  // q v E(t)
  double dQ_dt = 0.0;        // partial time derivative of Q at fixed x
  double residual = 0.0;     // dE_dt - drive_power - dQ_dt
  bool flagged = false;
};

// Centered differences over frames k - stride, k, k + stride.
PowerBalance power_balance_residual(const Evolution& evo, const Trajectory& tr, std::size_t frame,
                                    std::size_t stride = 1);

}  // namespace weaklab::intrinsics
