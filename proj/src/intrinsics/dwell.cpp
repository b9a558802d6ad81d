#include "weaklab/intrinsics/dwell.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weaklab/common/errors.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/weakval/weakval.hpp"

namespace weaklab::intrinsics {

namespace {

double fraction_inside(double x0, double x1, double a, double b) {
  if (x0 == x1) return (x0 >= a && x0 <= b) ? 1.0 : 0.0;
  const double sa = (a - x0) / (x1 - x0), sb = (b - x0) / (x1 - x0);
  const double lo = std::max(0.0, std::min(sa, sb));
  const double hi = std::min(1.0, std::max(sa, sb));
  return std::max(0.0, hi - lo);
}

double trapezoid_mass(const qgrid::Evolution& evo, const RVec& w, std::size_t stride) {
  const std::size_t n = evo.grid.n();
  const double h = evo.times[stride] - evo.times[0];
  std::size_t last = 0;
  for (std::size_t k = 0; k < evo.size(); k += stride) last = k;
  double s = 0.0;
  for (std::size_t k = 0; k <= last; k += stride) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m += w[j] * std::norm(evo.frames[k][j]);
    s += m * ((k == 0 || k == last) ? 0.5 : 1.0);
  }
  return s * h * evo.grid.dx();
}

}  // namespace

double dwell_time_trajectory(const bohm::Trajectory& tr, double a, double b, HorizonPolicy policy) {
  if (!(b > a)) throw ConfigError("dwell region needs b > a");
  const RVec& t = tr.t();
  const RVec& x = tr.positions;
  double tau = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) tau += (t[k + 1] - t[k]) * fraction_inside(x[k], x[k + 1], a, b);
  if (policy == HorizonPolicy::require_exit && x.back() >= a && x.back() <= b)
    throw HorizonError("trajectory " + std::to_string(tr.experiment_id) + " still inside the region at T");
  return tau;
}

DwellEnsemble dwell_time_ensemble(const bohm::TrajectoryEnsemble& ens, double a, double b, HorizonPolicy policy) {
  if (ens.size() == 0) throw EmptyEnsembleError("empty trajectory ensemble");
  DwellEnsemble r;
  r.per_trajectory.resize(ens.size());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    try {
      r.per_trajectory[i] = dwell_time_trajectory(ens.trajectories[i], a, b, policy);
    } catch (const HorizonError&) {
      ++bad;
    }
  }
  if (bad) throw HorizonError(std::to_string(bad) + " trajectories still inside the region at T", bad);
  r.n = ens.size();
  const double N = static_cast<double>(r.n);
  double s = 0.0;
  for (double v : r.per_trajectory) s += v;
  r.mean = s / N;
  double ss = 0.0;
  for (double v : r.per_trajectory) ss += (v - r.mean) * (v - r.mean);
  r.std_error = r.n > 1 ? std::sqrt(ss / (N - 1.0) / N) : 0.0;
  return r;
}

DwellDensity dwell_time_density(const qgrid::Evolution& evo, double a, double b, bool check_horizon) {
  if (evo.size() < 3) throw ConfigError("dwell density needs at least three frames");
  const RVec w = qgrid::window_weights(evo.grid, a, b);
  DwellDensity d;
  for (std::size_t j = 0; j < w.size(); ++j) d.final_mass += w[j] * std::norm(evo.frames.back()[j]);
  d.final_mass *= evo.grid.dx();
  if (check_horizon && d.final_mass > weakval::kHorizonMass)
    throw HorizonError("horizon too short: mass " + std::to_string(d.final_mass) + " still inside [a,b] at T");
  d.value = trapezoid_mass(evo, w, 1);
  if ((evo.size() - 1) % 2 == 0) {
    d.value_half = trapezoid_mass(evo, w, 2);
    d.richardson_rel = std::abs(d.value - d.value_half) / std::max(std::abs(d.value), 1e-300);
  } else {
    d.value_half = std::nan("");
    d.richardson_rel = std::nan("");
  }
  return d;
}

}  // namespace weaklab::intrinsics
