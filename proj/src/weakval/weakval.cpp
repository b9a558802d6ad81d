#include "weaklab/weakval/weakval.hpp"

#include <cmath>
#include <ostream>

#include "weaklab/common/errors.hpp"

namespace weaklab::weakval {

cplx ComplexField::at(double x, NodePolicy policy) const {
  return {re.at(x, policy), im.at(x, policy)};
}

ComplexField weak_value_field(const SpectralOperator& op, const WaveFunction& psi) {
  qgrid::require_same_grid(op.grid(), psi.grid);
  const std::size_t n = psi.grid.n();
  const CVec s = op.apply(psi.psi);
  const auto ok = qgrid::non_node_mask(psi.psi);
  ComplexField f{GridField{psi.grid, RVec(n, 0.0), ok}, GridField{psi.grid, RVec(n, 0.0), ok}};
  for (std::size_t j = 0; j < n; ++j) {
    if (!ok[j]) continue;
    const cplx w = s[j] / psi.psi[j];
    f.re.values[j] = w.real();
    f.im.values[j] = w.imag();
  }
  return f;
}

cplx aav_weak_value(const SpectralOperator& op, const WaveFunction& psi, double x) {
  try {
    return weak_value_field(op, psi).at(x, NodePolicy::signal);
  } catch (const NodeSingularity&) {
    throw PostSelectionImpossible(x);
  }
}

WeakValueSample aav_sample(const SpectralOperator& op, const WaveFunction& psi, double x) {
  return {x, aav_weak_value(op, psi, x), op.label(), psi.time};
}

GridField local_energy_grid(const WaveFunction& psi, const PotentialModel& pot, const Physics& phys) {
  const auto h = qgrid::build_hamiltonian(psi.grid, pot, psi.time, phys, false);
  return weak_value_field(h, psi).re;
}

double local_energy(const WaveFunction& psi, const PotentialModel& pot, const Physics& phys, double x) {
  try {
    return local_energy_grid(psi, pot, phys).at(x, NodePolicy::signal);
  } catch (const NodeSingularity&) {
    throw PostSelectionImpossible(x);
  }
}

EnsembleAverage ensemble_weak_average(const SpectralOperator& op, const WaveFunction& psi,
                                      const RVec& positions) {
  const GridField re = weak_value_field(op, psi).re;
  EnsembleAverage r;
  double s = 0.0, s2 = 0.0;
  for (double x : positions) {
    if (!re.valid_at(x)) {
      ++r.skipped;
      continue;
    }
    const double v = re.at(x, NodePolicy::signal);
    s += v;
    s2 += v * v;
    ++r.used;
  }
  if (r.used == 0) throw EmptyEnsembleError("every ensemble position sits on a node");
  const double N = static_cast<double>(r.used);
  r.mean = s / N;
  const double var = r.used > 1 ? std::max(0.0, (s2 - N * r.mean * r.mean) / (N - 1.0)) : 0.0;
  r.std_error = std::sqrt(var / N);
  return r;
}

double weak_average_quadrature(const SpectralOperator& op, const WaveFunction& psi) {
  const GridField re = weak_value_field(op, psi).re;
  double s = 0.0;
  for (std::size_t j = 0; j < psi.psi.size(); ++j)
    if (re.valid[j]) s += std::norm(psi.psi[j]) * re.values[j];
  return s * psi.grid.dx();
}

namespace {

// Backward Horner accumulation over frames 0, stride, 2*stride, ...
CVec horner(const Evolution& evo, const Propagator& prop, const RVec& w, std::size_t stride) {
  const std::size_t n = evo.grid.n();
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k < evo.size(); k += stride) ks.push_back(k);
  const double h = evo.times[stride] - evo.times[0];
  const std::size_t steps = evo.steps_per_frame * stride;
  auto add = [&](CVec& phi, std::size_t k, double weight) {
    for (std::size_t j = 0; j < n; ++j) phi[j] += weight * w[j] * evo.frames[k][j];
  };
  CVec phi(n, 0.0);
  add(phi, ks.back(), 0.5 * h);
  for (std::size_t q = ks.size() - 1; q-- > 0;) {
    qgrid::WaveFunction back(evo.grid, std::move(phi), evo.times[ks[q + 1]]);
    phi = prop.propagate(back, -(evo.times[ks[q + 1]] - evo.times[ks[q]]), steps).psi;
    add(phi, ks[q], q == 0 ? 0.5 * h : h);
  }
  return phi;
}

}  // namespace

DwellOperatorResult dwell_operator_field(const Evolution& evo, const Propagator& prop, double a, double b,
                                         bool check_horizon) {
  if (evo.size() < 3) throw ConfigError("dwell operator needs at least three frames");
  qgrid::require_same_grid(evo.grid, prop.grid());
  const auto& g = evo.grid;
  const std::size_t n = g.n();
  const RVec w = qgrid::window_weights(g, a, b);

  DwellOperatorResult r{GridField{g, RVec(n, 0.0), {}}, GridField{g, RVec(n, 0.0), {}}};
  r.horizon = evo.t_end() - evo.t_begin();
  for (std::size_t j = 0; j < n; ++j) r.final_mass += w[j] * std::norm(evo.frames.back()[j]);
  r.final_mass *= g.dx();
  if (check_horizon && r.final_mass > kHorizonMass)
    throw HorizonError("horizon too short: mass " + std::to_string(r.final_mass) + " still inside [a,b] at T");

  const CVec& psi0 = evo.frames.front();
  const CVec dpsi = horner(evo, prop, w, 1);
  const auto ok = qgrid::non_node_mask(psi0);
  r.field.valid = ok;
  r.field_imag.valid = ok;
  for (std::size_t j = 0; j < n; ++j) {
    if (!ok[j]) continue;
    const cplx v = dpsi[j] / psi0[j];
    r.field.values[j] = v.real();
    r.field_imag.values[j] = v.imag();
  }
  r.expectation = qgrid::inner(g, psi0, dpsi).real();
  if ((evo.size() - 1) % 2 == 0) {
    const CVec coarse = horner(evo, prop, w, 2);
    r.expectation_half = qgrid::inner(g, psi0, coarse).real();
    r.richardson_rel = std::abs(r.expectation - r.expectation_half) / std::max(std::abs(r.expectation), 1e-300);
  } else {
    r.expectation_half = std::nan("");
    r.richardson_rel = std::nan("");
  }
  return r;
}

double dwell_operator_weak_value(const WaveFunction& psi0, double x, double a, double b, double horizon,
                                 const Propagator& prop) {
  const Evolution evo = prop.evolve(psi0, horizon);
  const auto r = dwell_operator_field(evo, prop, a, b, true);
  try {
    return r.field.at(x, NodePolicy::signal);
  } catch (const NodeSingularity&) {
    throw PostSelectionImpossible(x);
  }
}

cplx dwell_integrand(const WaveFunction& psi0, double x, double a, double b, double t, const Propagator& prop) {
  const auto win = SpectralOperator::window(psi0.grid, a, b);
  WaveFunction fwd = prop.propagate(psi0, t);
  fwd = win.apply(fwd);
  const std::size_t steps = qgrid::step_count(t, prop.config().dt);
  const WaveFunction back = prop.propagate(fwd, -t, steps);
  const auto ok = qgrid::non_node_mask(psi0.psi);
  const std::size_t n = psi0.grid.n();
  GridField re{psi0.grid, RVec(n, 0.0), ok}, im{psi0.grid, RVec(n, 0.0), ok};
  for (std::size_t j = 0; j < n; ++j) {
    if (!ok[j]) continue;
    const cplx v = back.psi[j] / psi0.psi[j];
    re.values[j] = v.real();
    im.values[j] = v.imag();
  }
  try {
    return {re.at(x), im.at(x)};
  } catch (const NodeSingularity&) {
    throw PostSelectionImpossible(x);
  }
}

void write_weak_value_csv(const ComplexField& f, std::ostream& os) {
  const auto old = os.precision(kCsvPrecision);
  os << std::scientific << "x,Re,Im\n";
  for (std::size_t j = 0; j < f.re.values.size(); ++j) {
    if (!f.re.valid[j]) continue;
    os << f.re.grid.x(j) << ',' << f.re.values[j] << ',' << f.im.values[j] << '\n';
  }
  os.precision(old);
  os << std::defaultfloat;
}

}  // namespace weaklab::weakval
