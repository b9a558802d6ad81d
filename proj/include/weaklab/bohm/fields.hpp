#pragma once

#include <cstddef>

#include "weaklab/qgrid/field.hpp"
#include "weaklab/qgrid/wavefunction.hpp"

namespace weaklab::bohm {

using qgrid::GridField;
using qgrid::NodePolicy;
using qgrid::Physics;
using qgrid::WaveFunction;

// v = (hbar/m) Im(psi'/psi), spectral derivative.
GridField velocity_grid(const WaveFunction& psi, const Physics& phys);
double velocity_field(const WaveFunction& psi, double x, const Physics& phys,
                      NodePolicy policy = NodePolicy::signal);

enum class QuantumPotentialMethod {
  spectral,      // -(hbar^2/2m) [Re(psi''/psi) + Im(psi'/psi)^2]
  log_stencil5,  // 5-point stencil on ln R: R''/R = (ln R)'' + (ln R)'^2
  stencil3,      // 3-point stencil on R with spacing stride*dx
};

// Q = -(hbar^2/2m) R''/R. Points whose stencil touches a node are invalid.
GridField quantum_potential_grid(const WaveFunction& psi, const Physics& phys,
                                 QuantumPotentialMethod method = QuantumPotentialMethod::spectral,
                                 std::size_t stride = 1);
double quantum_potential(const WaveFunction& psi, double x, const Physics& phys,
                         QuantumPotentialMethod method = QuantumPotentialMethod::spectral);

}  // namespace weaklab::bohm
