#include "weaklab/intrinsics/current.hpp"

#include <cmath>
#include <ostream>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/fft.hpp"
#include "weaklab/common/parallel.hpp"

namespace weaklab::intrinsics {

CurrentSample current_per_experiment(const bohm::VelocityCache& vel, const bohm::Trajectory& tr,
                                     const CurrentConfig& cfg, std::size_t frame) {
  if (!(cfg.length > 0.0)) throw ConfigError("current length L must be positive");
  const double x = tr.positions.at(frame);
  const auto& f = vel.frame(frame);
  CurrentSample s;
  s.flagged = tr.truncated || !f.valid_at(x);
  s.value = cfg.charge / cfg.length * f.at(x, qgrid::NodePolicy::clamp);
  return s;
}

CurrentTraces current_traces(const bohm::VelocityCache& vel, const bohm::TrajectoryEnsemble& ens,
                             const CurrentConfig& cfg, std::size_t first, std::size_t last) {
  if (last < first || last >= ens.times->size()) throw ConfigError("current window outside the time axis");
  CurrentTraces t;
  t.times.assign(ens.times->begin() + static_cast<long>(first), ens.times->begin() + static_cast<long>(last) + 1);
  t.currents.assign(ens.size(), RVec(last - first + 1));
  std::vector<std::size_t> flags(ens.size(), 0);
  parallel_for(ens.size(), [&](std::size_t i) {
    for (std::size_t k = first; k <= last; ++k) {
      const auto s = current_per_experiment(vel, ens.trajectories[i], cfg, k);
      t.currents[i][k - first] = s.value;
      flags[i] += s.flagged;
    }
  });
  for (auto f : flags) t.flagged += f;
  return t;
}

PSDResult psd(const std::vector<RVec>& currents, double dt, std::size_t M, bool hann) {
  if (currents.empty()) throw EmptyEnsembleError("no current traces");
  const std::size_t T = currents.front().size();
  for (const auto& c : currents)
    if (c.size() != T) throw DimensionError("current traces differ in length");
  if (M == 0 || M >= T) throw LagError("lag horizon must be within the record length");
  if (!(dt > 0.0)) throw ConfigError("sampling step must be positive");

  std::size_t P = 1;
  while (P < T + M) P <<= 1;
  RVec acc(M + 1, 0.0);
  CVec buf(P);
  for (const auto& c : currents) {
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    for (std::size_t t = 0; t < T; ++t) buf[t] = c[t];
    fft::forward(buf);
    for (auto& v : buf) v = std::norm(v);
    fft::inverse(buf);
    for (std::size_t m = 0; m <= M; ++m) acc[m] += buf[m].real();
  }
  PSDResult r;
  r.tau_max = static_cast<double>(M) * dt;
  r.lags.resize(M + 1);
  r.correlation.resize(M + 1);
  const double norm = 1.0 / (static_cast<double>(currents.size()) * static_cast<double>(T));
  for (std::size_t m = 0; m <= M; ++m) {
    r.lags[m] = static_cast<double>(m) * dt;
    r.correlation[m] = acc[m] * norm;
  }
  RVec w(M + 1, 1.0);
  w[M] = 0.5;
  if (hann)
    for (std::size_t m = 0; m <= M; ++m) w[m] *= 0.5 * (1.0 + std::cos(kPi * static_cast<double>(m) / static_cast<double>(M)));

  const long Ml = static_cast<long>(M);
  r.omega.resize(2 * M + 1);
  r.values.resize(2 * M + 1);
  for (long k = -Ml; k <= Ml; ++k) {
    const double om = kPi * static_cast<double>(k) / (static_cast<double>(M) * dt);
    double s = w[0] * r.correlation[0];
    for (std::size_t m = 1; m <= M; ++m)
      s += 2.0 * w[m] * r.correlation[m] * std::cos(om * static_cast<double>(m) * dt);
    r.omega[static_cast<std::size_t>(Ml + k)] = om;
    r.values[static_cast<std::size_t>(Ml + k)] = s * dt;
  }
  return r;
}

void write_psd_csv(const PSDResult& r, std::ostream& os) {
  const auto old = os.precision(kCsvPrecision);
  os << std::scientific << "omega,psd\n";
  for (std::size_t k = 0; k < r.omega.size(); ++k) os << r.omega[k] << ',' << r.values[k] << '\n';
  os.precision(old);
  os << std::defaultfloat;
}

}  // namespace weaklab::intrinsics
