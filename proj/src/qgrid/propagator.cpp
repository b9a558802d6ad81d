#include "weaklab/qgrid/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/fft.hpp"

namespace weaklab::qgrid {

namespace {

constexpr double kNormDrift = 1e-6;
constexpr double kCnTol = 1e-14;
constexpr int kCnMaxIter = 400;

// Thomas algorithm with constant off-diagonal `e`.
void solve_tridiagonal(const CVec& diag, cplx e, const CVec& rhs, CVec& x, CVec& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  x.resize(n);
  cplx beta = diag[0];
  x[0] = rhs[0] / beta;
  for (std::size_t j = 1; j < n; ++j) {
    scratch[j] = e / beta;
    beta = diag[j] - e * scratch[j];
    x[j] = (rhs[j] - e * x[j - 1]) / beta;
  }
  for (std::size_t j = n - 1; j-- > 0;) x[j] -= scratch[j + 1] * x[j + 1];
}

// Periodic tridiagonal system (diag, off-diagonal e, corners e) via
// Sherman-Morrison.
void solve_cyclic(CVec diag, cplx e, const CVec& rhs, CVec& x) {
  const std::size_t n = diag.size();
  const cplx gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= e * e / gamma;
  CVec scratch, z, u(n, 0.0);
  solve_tridiagonal(diag, e, rhs, x, scratch);
  u[0] = gamma;
  u[n - 1] = e;
  solve_tridiagonal(diag, e, u, z, scratch);
  const cplx fact = (x[0] + e * x[n - 1] / gamma) / (1.0 + z[0] + e * z[n - 1] / gamma);
  for (std::size_t j = 0; j < n; ++j) x[j] -= fact * z[j];
}

}  // namespace

std::size_t step_count(double duration, double dt) {
  if (duration == 0.0) return 0;
  if (!(dt > 0.0)) throw ConfigError("propagator.dt must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(duration) / dt - 1e-9)));
}

std::size_t Evolution::index_of(double t) const {
  if (times.empty()) throw NumericError("empty evolution");
  const double d = dt_out();
  double u = d > 0.0 ? (t - times.front()) / d : 0.0;
  const long k = std::lround(u);
  if (k < 0 || static_cast<std::size_t>(k) >= times.size() ||
      std::abs(times[static_cast<std::size_t>(k)] - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw NumericError("time " + std::to_string(t) + " is not a stored frame");
  return static_cast<std::size_t>(k);
}

Evolution Evolution::strided(std::size_t stride) const {
  if (stride == 0) throw ConfigError("stride must be positive");
  Evolution e{grid, physics, potential, {}, {}, steps_per_frame * stride};
  for (std::size_t k = 0; k < frames.size(); k += stride) {
    e.times.push_back(times[k]);
    e.frames.push_back(frames[k]);
  }
  return e;
}

Propagator::Propagator(Grid1D g, Physics phys, PotentialModel pot, PropagatorConfig cfg)
    : grid_(std::move(g)), phys_(phys), pot_(std::move(pot)), cfg_(cfg) {
  if (!(cfg_.dt > 0.0)) throw ConfigError("propagator.dt must be positive");
  if (cfg_.steps_per_output == 0) throw ConfigError("propagator.steps_per_output must be >= 1");
  pot_.check_resolution(grid_);
}

void Propagator::run(CVec& psi, double t0, double h, std::size_t steps, double norm0) const {
  const std::size_t n = grid_.n();
  const double hbar = phys_.hbar;
  const RVec vstatic = pot_.static_values(grid_, phys_);
  const RVec disp = grid_.kinetic_dispersion(phys_);
  const bool td = pot_.time_dependent();

  auto potential_at = [&](double t, RVec& v) {
    v = vstatic;
    if (td) {
      const double e = pot_.field(t);
      if (e != 0.0)
        for (std::size_t j = 0; j < n; ++j) v[j] -= phys_.charge * e * grid_.x(j);
    }
  };

  RVec v;
  CVec work(n), rhs(n), phi(n), prev(n);

  if (cfg_.method == Method::split_operator) {
    CVec kin(n), half(n);
    for (std::size_t m = 0; m < n; ++m) kin[m] = std::exp(cplx(0.0, -disp[m] * h / hbar));
    double last_field = std::nan("");
    for (std::size_t s = 0; s < steps; ++s) {
      const double tm = t0 + (static_cast<double>(s) + 0.5) * h;
      const double f = td ? pot_.field(tm) : 0.0;
      if (s == 0 || f != last_field) {
        potential_at(tm, v);
        for (std::size_t j = 0; j < n; ++j) half[j] = std::exp(cplx(0.0, -0.5 * v[j] * h / hbar));
        last_field = f;
      }
      for (std::size_t j = 0; j < n; ++j) psi[j] *= half[j];
      fft::forward(psi);
      for (std::size_t m = 0; m < n; ++m) psi[m] *= kin[m];
      fft::inverse(psi);
      for (std::size_t j = 0; j < n; ++j) psi[j] *= half[j];
      double nn = 0.0;
      for (const auto& a : psi) nn += std::norm(a);
      nn *= grid_.dx();
      if (!(std::abs(nn - norm0) <= kNormDrift * norm0)) throw StepSizeError(std::abs(h), "norm drift");
    }
    return;
  }

  const double alpha = h / (2.0 * hbar);
  for (std::size_t s = 0; s < steps; ++s) {
    const double tm = t0 + (static_cast<double>(s) + 0.5) * h;
    potential_at(tm, v);
    if (phys_.kinetic == KineticScheme::stencil) {
      const double beta = hbar * hbar / (2.0 * phys_.mass * grid_.dx() * grid_.dx());
      CVec diag(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double hd = 2.0 * beta + v[j];
        diag[j] = cplx(1.0, alpha * hd);
        rhs[j] = cplx(1.0, -alpha * hd) * psi[j] +
                 cplx(0.0, alpha * beta) * (psi[(j + n - 1) % n] + psi[(j + 1) % n]);
      }
      solve_cyclic(std::move(diag), cplx(0.0, -alpha * beta), rhs, psi);
    } else {
      const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
      const double vbar = 0.5 * (*vmin + *vmax);
      const double contraction = std::abs(alpha) * 0.5 * (*vmax - *vmin);
      if (contraction > 0.5)
        throw StepSizeError(std::abs(h), "Crank-Nicolson iteration would not contract (alpha*|V-Vbar| = " +
                                             std::to_string(contraction) + ")");
      // rhs = (1 - i alpha H) psi
      work = psi;
      fft::forward(work);
      for (std::size_t m = 0; m < n; ++m) work[m] *= disp[m];
      fft::inverse(work);
      for (std::size_t j = 0; j < n; ++j) rhs[j] = psi[j] - cplx(0.0, alpha) * (work[j] + v[j] * psi[j]);
      phi = psi;
      int it = 0;
      for (;; ++it) {
        if (it >= kCnMaxIter) throw StepSizeError(std::abs(h), "Crank-Nicolson iteration did not converge");
        prev = phi;
        for (std::size_t j = 0; j < n; ++j) work[j] = rhs[j] - cplx(0.0, alpha * (v[j] - vbar)) * phi[j];
        fft::forward(work);
        for (std::size_t m = 0; m < n; ++m) work[m] /= cplx(1.0, alpha * (disp[m] + vbar));
        fft::inverse(work);
        phi = work;
        double dn = 0.0, pn = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dn += std::norm(phi[j] - prev[j]);
          pn += std::norm(phi[j]);
        }
        if (dn <= kCnTol * kCnTol * pn) break;
      }
      psi = phi;
    }
    double nn = 0.0;
    for (const auto& a : psi) nn += std::norm(a);
    nn *= grid_.dx();
    if (!(std::abs(nn - norm0) <= kNormDrift * norm0)) throw StepSizeError(std::abs(h), "norm drift");
  }
}

WaveFunction Propagator::propagate(const WaveFunction& psi, double duration) const {
  return propagate(psi, duration, step_count(duration, cfg_.dt));
}

WaveFunction Propagator::propagate(const WaveFunction& psi, double duration, std::size_t steps) const {
  require_same_grid(grid_, psi.grid);
  WaveFunction out = psi;
  if (steps == 0 || duration == 0.0) return out;
  const double h = duration / static_cast<double>(steps);
  run(out.psi, psi.time, h, steps, psi.norm2());
  out.time = psi.time + duration;
  return out;
}

Evolution Propagator::evolve(const WaveFunction& psi, double duration) const {
  require_same_grid(grid_, psi.grid);
  if (!(duration > 0.0)) throw ConfigError("evolution duration must be positive");
  const double dt_out = cfg_.dt * static_cast<double>(cfg_.steps_per_output);
  const std::size_t nf = step_count(duration, dt_out);
  const double d_out = duration / static_cast<double>(nf);
  const double h = d_out / static_cast<double>(cfg_.steps_per_output);
  Evolution e{grid_, phys_, pot_, {}, {}, cfg_.steps_per_output};
  e.times.reserve(nf + 1);
  e.frames.reserve(nf + 1);
  e.times.push_back(psi.time);
  e.frames.push_back(psi.psi);
  CVec cur = psi.psi;
  const double norm0 = psi.norm2();
  for (std::size_t k = 0; k < nf; ++k) {
    const double tk = psi.time + static_cast<double>(k) * d_out;
    run(cur, tk, h, cfg_.steps_per_output, norm0);
    e.times.push_back(psi.time + static_cast<double>(k + 1) * d_out);
    e.frames.push_back(cur);
  }
  return e;
}

}  // namespace weaklab::qgrid
