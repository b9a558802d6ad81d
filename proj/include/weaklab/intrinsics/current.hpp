#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "weaklab/bohm/trajectories.hpp"

namespace weaklab::intrinsics {

struct CurrentConfig {
  double length = 1.0;  // contact separation L
  double charge = 1.0;
};

struct CurrentSample {
  double value = 0.0;
  bool flagged = false;  // trajectory point on a node; value uses the clamp fallback
};

// I = (q/L) v(x(t), t) at stored frame `frame`.
CurrentSample current_per_experiment(const bohm::VelocityCache& vel, const bohm::Trajectory& tr,
                                     const CurrentConfig& cfg, std::size_t frame);

struct CurrentTraces {
  RVec times;
  std::vector<RVec> currents;  // one row per experiment
  std::size_t flagged = 0;
};

// Frames [first, last] of every trajectory.
CurrentTraces current_traces(const bohm::VelocityCache& vel, const bohm::TrajectoryEnsemble& ens,
                             const CurrentConfig& cfg, std::size_t first, std::size_t last);

struct PSDResult {
  RVec omega;        // pi k / (M dt), k = -M..M
  RVec values;
  double tau_max = 0.0;
  RVec lags;         // 0..M times dt
  RVec correlation;  // biased autocorrelation C(tau_m)
};

// Ensemble- and time-averaged biased autocorrelation over |lag| <= max_lag
// samples, then a trapezoid-weighted cosine transform, so PSD(0) is the
// trapezoid integral of C over [-tau_max, tau_max]. A Hann lag window is
// optional.
PSDResult psd(const std::vector<RVec>& currents, double dt, std::size_t max_lag, bool hann = false);

void write_psd_csv(const PSDResult& r, std::ostream& os);

}  // namespace weaklab::intrinsics
