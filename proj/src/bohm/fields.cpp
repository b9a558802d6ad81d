#include "weaklab/bohm/fields.hpp"

#include <cmath>

#include "weaklab/common/errors.hpp"

namespace weaklab::bohm {

GridField velocity_grid(const WaveFunction& psi, const Physics& phys) {
  const std::size_t n = psi.grid.n();
  const CVec d1 = qgrid::spectral_derivative(psi.grid, psi.psi, 1);
  GridField f{psi.grid, RVec(n, 0.0), qgrid::non_node_mask(psi.psi)};
  for (std::size_t j = 0; j < n; ++j)
    if (f.valid[j]) f.values[j] = phys.hbar / phys.mass * (d1[j] / psi.psi[j]).imag();
  return f;
}

double velocity_field(const WaveFunction& psi, double x, const Physics& phys, NodePolicy policy) {
  return velocity_grid(psi, phys).at(x, policy);
}

GridField quantum_potential_grid(const WaveFunction& psi, const Physics& phys,
                                 QuantumPotentialMethod method, std::size_t stride) {
  const std::size_t n = psi.grid.n();
  const double pre = -phys.hbar * phys.hbar / (2.0 * phys.mass);
  const auto ok = qgrid::non_node_mask(psi.psi);
  GridField f{psi.grid, RVec(n, 0.0), ok};

  if (method == QuantumPotentialMethod::spectral) {
    const CVec d1 = qgrid::spectral_derivative(psi.grid, psi.psi, 1);
    const CVec d2 = qgrid::spectral_derivative(psi.grid, psi.psi, 2);
    for (std::size_t j = 0; j < n; ++j) {
      if (!ok[j]) continue;
      const double im = (d1[j] / psi.psi[j]).imag();
      f.values[j] = pre * ((d2[j] / psi.psi[j]).real() + im * im);
    }
    return f;
  }

  if (stride == 0) throw ConfigError("stencil stride must be positive");
  const long s = static_cast<long>(stride);
  const long nn = static_cast<long>(n);
  const double h = static_cast<double>(stride) * psi.grid.dx();
  auto at = [&](long j) { return static_cast<std::size_t>(((j % nn) + nn) % nn); };
  const long reach = method == QuantumPotentialMethod::stencil3 ? s : 2 * s;

  RVec r(n), lr(n);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = std::abs(psi.psi[j]);
    lr[j] = ok[j] ? std::log(r[j]) : 0.0;
  }
  for (long j = 0; j < nn; ++j) {
    bool good = true;
    for (long q = -reach; q <= reach && good; q += s) good = ok[at(j + q)];
    f.valid[at(j)] = good;
    if (!good) continue;
    double ratio;
    if (method == QuantumPotentialMethod::stencil3) {
      ratio = (r[at(j + s)] - 2.0 * r[at(j)] + r[at(j - s)]) / (h * h * r[at(j)]);
    } else {
      const double lm2 = lr[at(j - 2 * s)], lm1 = lr[at(j - s)], l0 = lr[at(j)];
      const double lp1 = lr[at(j + s)], lp2 = lr[at(j + 2 * s)];
      const double d1 = (lm2 - 8.0 * lm1 + 8.0 * lp1 - lp2) / (12.0 * h);
      const double d2 = (-lm2 + 16.0 * lm1 - 30.0 * l0 + 16.0 * lp1 - lp2) / (12.0 * h * h);
      ratio = d2 + d1 * d1;
    }
    f.values[at(j)] = pre * ratio;
  }
  return f;
}

double quantum_potential(const WaveFunction& psi, double x, const Physics& phys,
                         QuantumPotentialMethod method) {
  return quantum_potential_grid(psi, phys, method).at(x, NodePolicy::signal);
}

}  // namespace weaklab::bohm
