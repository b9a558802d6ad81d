#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "weaklab/qgrid/field.hpp"
#include "weaklab/qgrid/propagator.hpp"

namespace weaklab::bohm {

using qgrid::Evolution;

// Positions drawn from |psi|^2 by inverse CDF. Cell j carries mass
// |psi_j|^2 dx spread uniformly over [x_j - dx/2, x_j + dx/2), so the CDF is
// linear inside each cell. Deterministic in `seed`.
RVec sample_initial_positions(const qgrid::WaveFunction& psi, std::size_t n, std::uint64_t seed);

struct Trajectory {
  std::shared_ptr<const RVec> times;
  RVec positions;
  std::size_t experiment_id = 0;
  bool truncated = false;  // left the domain; frozen from then on

  const RVec& t() const { return *times; }
};

struct TrajectoryEnsemble {
  std::shared_ptr<const RVec> times;
  std::vector<Trajectory> trajectories;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return trajectories.size(); }
  RVec positions_at(std::size_t frame) const;
  std::size_t truncated_count() const;
};

struct IntegratorOptions {
  std::size_t substeps = 1;  // RK4 steps per stored frame interval
};

// Velocity fields of every stored frame, reused across ensembles.
class VelocityCache {
 public:
  explicit VelocityCache(const Evolution& evo);
  const Evolution& evolution() const noexcept { return *evo_; }
  // Linear in time between frames k and k+1, cubic in x.
  double at(double x, std::size_t k, double theta) const;
  const qgrid::GridField& frame(std::size_t k) const { return fields_[k]; }

 private:
  const Evolution* evo_;
  std::vector<qgrid::GridField> fields_;
};

// RK4 between stored frames. Nodes are handled with the clamp policy.
TrajectoryEnsemble integrate_trajectories(const Evolution& evo, const RVec& starts,
                                          std::uint64_t seed = 0, IntegratorOptions opt = {});
TrajectoryEnsemble integrate_trajectories(const VelocityCache& cache, const RVec& starts,
                                          std::uint64_t seed = 0, IntegratorOptions opt = {});

// L1 distance between the ensemble histogram and |psi|^2 over `bins`
// equal-probability bins of the grid density.
double equivariance_l1(const qgrid::WaveFunction& psi, const RVec& positions, std::size_t bins = 16);

// True when the ordering of all trajectories is the same at every frame.
bool non_crossing(const TrajectoryEnsemble& ens);

// Columns t, x_1..x_N; one row per frame.
void write_csv(const TrajectoryEnsemble& ens, std::ostream& os);

}  // namespace weaklab::bohm
