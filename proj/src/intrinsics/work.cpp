#include "weaklab/intrinsics/work.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "weaklab/bohm/fields.hpp"
#include "weaklab/common/errors.hpp"
#include "weaklab/common/parallel.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/weakval/weakval.hpp"

namespace weaklab::intrinsics {

namespace {
std::mutex g_cache_mu;

double quantile(RVec& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<long>(lo), v.end());
  const double a = v[lo];
  std::nth_element(v.begin(), v.begin() + static_cast<long>(hi), v.end());
  const double b = v[hi];
  return a + (pos - static_cast<double>(lo)) * (b - a);
}
}  // namespace

LocalEnergyFrames::LocalEnergyFrames(const Evolution& evo) : evo_(&evo), cache_(evo.size()) {}

const qgrid::GridField& LocalEnergyFrames::at(std::size_t k) const {
  std::lock_guard lock(g_cache_mu);
  if (!cache_.at(k))
    cache_[k] = std::make_unique<qgrid::GridField>(
        weakval::local_energy_grid(evo_->frame(k), evo_->potential, evo_->physics));
  return *cache_[k];
}

WorkRecord work_per_experiment(const LocalEnergyFrames& energies, const Trajectory& tr, double t1, double t2) {
  const auto& evo = energies.evolution();
  const std::size_t k1 = evo.index_of(t1), k2 = evo.index_of(t2);
  WorkRecord r;
  r.experiment_id = tr.experiment_id;
  const double x1 = tr.positions.at(k1), x2 = tr.positions.at(k2);
  const auto& f1 = energies.at(k1);
  const auto& f2 = energies.at(k2);
  if (tr.truncated || !f1.valid_at(x1) || !f2.valid_at(x2)) {
    r.flagged = true;
    return r;
  }
  r.E_initial = f1.at(x1);
  r.E_final = f2.at(x2);
  r.work = r.E_final - r.E_initial;
  return r;
}

WorkRecord work_per_experiment(const Evolution& evo, const Trajectory& tr, double t1, double t2) {
  return work_per_experiment(LocalEnergyFrames(evo), tr, t1, t2);
}

std::vector<WorkRecord> work_records(const Evolution& evo, const TrajectoryEnsemble& ens, double t1, double t2) {
  const LocalEnergyFrames energies(evo);
  energies.at(evo.index_of(t1));
  energies.at(evo.index_of(t2));
  std::vector<WorkRecord> out(ens.size());
  parallel_for(ens.size(), [&](std::size_t i) { out[i] = work_per_experiment(energies, ens.trajectories[i], t1, t2); });
  return out;
}

WorkDistribution work_distribution(const std::vector<WorkRecord>& records, double resolution) {
  WorkDistribution d;
  RVec w;
  for (const auto& r : records) {
    if (r.flagged)
      ++d.flagged;
    else
      w.push_back(r.work);
  }
  if (w.empty()) throw EmptyEnsembleError("every work record is flagged");
  d.N = w.size();
  const double N = static_cast<double>(d.N);
  double s = 0.0;
  for (double v : w) s += v;
  d.mean = s / N;
  double ss = 0.0;
  for (double v : w) ss += (v - d.mean) * (v - d.mean);
  d.variance = d.N > 1 ? ss / (N - 1.0) : 0.0;
  d.std_error = std::sqrt(d.variance / N);

  const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
  const double lo = *mn, hi = *mx;
  if (hi - lo < resolution) {
    d.bin_edges = {d.mean - 0.5 * resolution, d.mean + 0.5 * resolution};
    d.probabilities = {1.0};
    d.binned_mean = d.mean;
    return d;
  }
  RVec tmp = w;
  const double iqr = quantile(tmp, 0.75) - quantile(tmp, 0.25);
  double width = 2.0 * iqr / std::cbrt(N);
  if (!(width > 0.0)) width = (hi - lo) / std::ceil(std::sqrt(N));
  const auto bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 100000.0));
  width = (hi - lo) / static_cast<double>(bins);
  d.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) d.bin_edges[b] = lo + width * static_cast<double>(b);
  d.bin_edges.back() = hi;
  d.probabilities.assign(bins, 0.0);
  for (double v : w) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    d.probabilities[std::min(b, bins - 1)] += 1.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    d.probabilities[b] /= N;
    d.binned_mean += 0.5 * (d.bin_edges[b] + d.bin_edges[b + 1]) * d.probabilities[b];
  }
  return d;
}

namespace {

// Point values of E, Q and v from band-limited interpolants of psi, psi',
// psi'' and H psi, so the finite differences see no interpolation ripple.
struct PointFields {
  qgrid::BandLimited psi, d1, d2, hpsi;
  const qgrid::Physics& phys;
  double rho_floor;

  PointFields(const Evolution& evo, std::size_t k)
      : psi(evo.grid, evo.frames[k]),
        d1(evo.grid, qgrid::spectral_derivative(evo.grid, evo.frames[k], 1)),
        d2(evo.grid, qgrid::spectral_derivative(evo.grid, evo.frames[k], 2)),
        hpsi(evo.grid, qgrid::build_hamiltonian(evo.grid, evo.potential, evo.times[k], evo.physics, false)
                           .apply(evo.frames[k])),
        phys(evo.physics),
        rho_floor(0.0) {
    for (const auto& c : evo.frames[k]) rho_floor = std::max(rho_floor, std::norm(c));
    rho_floor *= qgrid::kNodeThreshold;
  }
  bool ok(double x) const { return std::norm(psi.at(x)) >= rho_floor; }
  double energy(double x) const { return (hpsi.at(x) / psi.at(x)).real(); }
  double velocity(double x) const { return phys.hbar / phys.mass * (d1.at(x) / psi.at(x)).imag(); }
  double quantum(double x) const {
    const cplx p = psi.at(x);
    const double im = (d1.at(x) / p).imag();
    return -phys.hbar * phys.hbar / (2.0 * phys.mass) * ((d2.at(x) / p).real() + im * im);
  }
};

}  // namespace

PowerBalance power_balance_residual(const Evolution& evo, const Trajectory& tr, std::size_t k, std::size_t s) {
  if (s == 0 || k < s || k + s >= evo.size()) throw ConfigError("power balance needs frames k-stride..k+stride");
  PowerBalance p;
  if (tr.truncated) {
    p.flagged = true;
    return p;
  }
  const double h = evo.times[k + s] - evo.times[k];
  const double xm = tr.positions[k - s], x0 = tr.positions[k], xp = tr.positions[k + s];
  const PointFields fm(evo, k - s), f0(evo, k), fp(evo, k + s);
  if (!fm.ok(xm) || !fm.ok(x0) || !fp.ok(xp) || !fp.ok(x0) || !f0.ok(x0)) {
    p.flagged = true;
    return p;
  }
  p.dE_dt = (fp.energy(xp) - fm.energy(xm)) / (2.0 * h);
  p.dQ_dt = (fp.quantum(x0) - fm.quantum(x0)) / (2.0 * h);
  p.drive_power = evo.physics.charge * f0.velocity(x0) * evo.potential.field(evo.times[k]);
  p.residual = p.dE_dt - p.drive_power - p.dQ_dt;
  return p;
}

}  // namespace weaklab::intrinsics
