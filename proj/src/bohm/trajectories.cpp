#include "weaklab/bohm/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "weaklab/bohm/fields.hpp"
#include "weaklab/common/errors.hpp"
#include "weaklab/common/parallel.hpp"
#include "weaklab/common/rng.hpp"

namespace weaklab::bohm {

namespace {

// Cell-model CDF: C[j] = mass of cells 0..j.
RVec cell_cdf(const qgrid::WaveFunction& psi) {
  RVec c(psi.psi.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    acc += std::norm(psi.psi[j]);
    c[j] = acc;
  }
  if (!(acc > 0.0)) throw NumericError("cannot sample a null state");
  for (auto& v : c) v /= acc;
  return c;
}

}  // namespace

RVec sample_initial_positions(const qgrid::WaveFunction& psi, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("ensemble.n must be >= 1");
  const RVec cdf = cell_cdf(psi);
  const auto& g = psi.grid;
  auto eng = rng::make_engine(seed, rng::kInitialPositions);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  RVec out(n);
  for (auto& x : out) {
    const double u = uni(eng);
    std::size_t j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    j = std::min(j, cdf.size() - 1);
    while (j > 0 && cdf[j] == cdf[j - 1]) --j;  // skip empty cells
    const double lo = j ? cdf[j - 1] : 0.0;
    const double frac = cdf[j] > lo ? (u - lo) / (cdf[j] - lo) : 0.5;
    x = g.x(j) + (frac - 0.5) * g.dx();
    if (x < g.x_min()) x += g.length();
    if (x >= g.x_max()) x -= g.length();
  }
  return out;
}

RVec TrajectoryEnsemble::positions_at(std::size_t frame) const {
  RVec x(trajectories.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = trajectories[i].positions[frame];
  return x;
}

std::size_t TrajectoryEnsemble::truncated_count() const {
  return static_cast<std::size_t>(
      std::count_if(trajectories.begin(), trajectories.end(), [](const auto& t) { return t.truncated; }));
}

VelocityCache::VelocityCache(const Evolution& evo) : evo_(&evo), fields_(evo.size(), qgrid::GridField{evo.grid, {}, {}}) {
  parallel_for(evo.size(), [&](std::size_t k) { fields_[k] = velocity_grid(evo.frame(k), evo.physics); });
}

double VelocityCache::at(double x, std::size_t k, double theta) const {
  const double v0 = fields_[k].at(x, qgrid::NodePolicy::clamp);
  if (theta == 0.0 || k + 1 >= fields_.size()) return v0;
  const double v1 = fields_[k + 1].at(x, qgrid::NodePolicy::clamp);
  return (1.0 - theta) * v0 + theta * v1;
}

TrajectoryEnsemble integrate_trajectories(const Evolution& evo, const RVec& starts, std::uint64_t seed,
                                          IntegratorOptions opt) {
  const VelocityCache cache(evo);
  return integrate_trajectories(cache, starts, seed, opt);
}

TrajectoryEnsemble integrate_trajectories(const VelocityCache& cache, const RVec& starts, std::uint64_t seed,
                                          IntegratorOptions opt) {
  const Evolution& evo = cache.evolution();
  if (evo.size() < 2) throw ConfigError("trajectory integration needs at least two frames");
  if (opt.substeps == 0) throw ConfigError("substeps must be >= 1");
  const auto& g = evo.grid;
  for (double x : starts)
    if (!g.contains(x)) throw ConfigError("trajectory start outside the grid domain");

  TrajectoryEnsemble ens;
  ens.times = std::make_shared<const RVec>(evo.times);
  ens.seed = seed;
  ens.trajectories.resize(starts.size());
  const std::size_t nf = evo.size();
  const double dt_out = evo.dt_out();
  const double h = dt_out / static_cast<double>(opt.substeps);
  const double inv = 1.0 / static_cast<double>(opt.substeps);

  parallel_for(starts.size(), [&](std::size_t i) {
    Trajectory& tr = ens.trajectories[i];
    tr.times = ens.times;
    tr.experiment_id = i;
    tr.positions.resize(nf);
    double x = starts[i];
    tr.positions[0] = x;
    for (std::size_t k = 0; k + 1 < nf; ++k) {
      if (!tr.truncated) {
        for (std::size_t s = 0; s < opt.substeps; ++s) {
          const double th0 = static_cast<double>(s) * inv;
          const double thm = (static_cast<double>(s) + 0.5) * inv;
          const double th1 = static_cast<double>(s + 1) * inv;
          const double k1 = cache.at(x, k, th0);
          const double k2 = cache.at(x + 0.5 * h * k1, k, thm);
          const double k3 = cache.at(x + 0.5 * h * k2, k, thm);
          const double k4 = cache.at(x + h * k3, k, th1);
          const double nx = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          if (!std::isfinite(nx) || !g.contains(nx)) {
            tr.truncated = true;
            break;
          }
          x = nx;
        }
      }
      tr.positions[k + 1] = x;
    }
  });
  return ens;
}

double equivariance_l1(const qgrid::WaveFunction& psi, const RVec& positions, std::size_t bins) {
  if (positions.empty()) throw EmptyEnsembleError("no positions");
  if (bins == 0) throw ConfigError("bins must be >= 1");
  const RVec cdf = cell_cdf(psi);
  const auto& g = psi.grid;
  const auto n = static_cast<long>(g.n());
  std::vector<double> count(bins, 0.0);
  for (double x : positions) {
    long j = std::lround((x - g.x_min()) / g.dx());
    j = std::clamp(j, 0L, n - 1);
    const auto ju = static_cast<std::size_t>(j);
    const double lo = ju ? cdf[ju - 1] : 0.0;
    const double frac = std::clamp((x - (g.x(ju) - 0.5 * g.dx())) / g.dx(), 0.0, 1.0);
    const double F = std::clamp(lo + frac * (cdf[ju] - lo), 0.0, 1.0);
    const auto b = std::min(bins - 1, static_cast<std::size_t>(F * static_cast<double>(bins)));
    count[b] += 1.0;
  }
  const double N = static_cast<double>(positions.size());
  double l1 = 0.0;
  for (double c : count) l1 += std::abs(c / N - 1.0 / static_cast<double>(bins));
  return l1;
}

bool non_crossing(const TrajectoryEnsemble& ens) {
  const std::size_t N = ens.size();
  if (N < 2) return true;
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  const RVec x0 = ens.positions_at(0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x0[a] < x0[b]; });
  const std::size_t nf = ens.times->size();
  for (std::size_t k = 1; k < nf; ++k) {
    for (std::size_t q = 0; q + 1 < N; ++q) {
      const double a = ens.trajectories[order[q]].positions[k];
      const double b = ens.trajectories[order[q + 1]].positions[k];
      if (a > b) return false;
      if (x0[order[q]] < x0[order[q + 1]] && a == b) return false;
    }
  }
  return true;
}

void write_csv(const TrajectoryEnsemble& ens, std::ostream& os) {
  const auto old = os.precision(kCsvPrecision);
  os << std::scientific << "t";
  for (std::size_t i = 0; i < ens.size(); ++i) os << ",x_" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < ens.times->size(); ++k) {
    os << (*ens.times)[k];
    for (const auto& tr : ens.trajectories) os << ',' << tr.positions[k];
    os << '\n';
  }
  os.precision(old);
  os << std::defaultfloat;
}

}  // namespace weaklab::bohm
