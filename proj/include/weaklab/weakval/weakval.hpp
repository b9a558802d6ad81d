#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "weaklab/qgrid/field.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/qgrid/propagator.hpp"

namespace weaklab::weakval {

using qgrid::Evolution;
using qgrid::GridField;
using qgrid::NodePolicy;
using qgrid::Physics;
using qgrid::PotentialModel;
using qgrid::Propagator;
using qgrid::SpectralOperator;
using qgrid::WaveFunction;

struct WeakValueSample {
  double post_selection_x = 0.0;
  cplx value;
  std::string operator_label;
  double time = 0.0;
};

// <x|S|psi>/<x|psi> on every grid point; real and imaginary parts are
// interpolated separately.
struct ComplexField {
  GridField re;
  GridField im;
  cplx at(double x, NodePolicy policy = NodePolicy::signal) const;
};

ComplexField weak_value_field(const SpectralOperator& op, const WaveFunction& psi);

// Local (position post-selected) AAV weak value. Throws
// PostSelectionImpossible at nodes.
cplx aav_weak_value(const SpectralOperator& op, const WaveFunction& psi, double x);
WeakValueSample aav_sample(const SpectralOperator& op, const WaveFunction& psi, double x);

// Re[<x|H|psi>/<x|psi>] with H = T + V(x). The drive field is an external
// agent and is not part of the local energy.
GridField local_energy_grid(const WaveFunction& psi, const PotentialModel& pot, const Physics& phys);
double local_energy(const WaveFunction& psi, const PotentialModel& pot, const Physics& phys, double x);

struct EnsembleAverage {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // samples sitting on nodes
};

// (1/N) sum Re[weak value at x_i] with its standard error.
EnsembleAverage ensemble_weak_average(const SpectralOperator& op, const WaveFunction& psi,
                                      const RVec& positions);
// sum_j |psi_j|^2 Re[wv_j] dx over non-node points.
double weak_average_quadrature(const SpectralOperator& op, const WaveFunction& psi);

// ---- dwell-time operator D = int_0^T U^dagger(t) A U(t) dt ----------------

inline constexpr double kHorizonMass = 1e-4;

struct DwellOperatorResult {
  GridField field;             // Re[<x|D|psi0>/<x|psi0>]
  GridField field_imag;        // Im part, reported only
  double expectation = 0.0;    // Re <psi0|D|psi0>
  double expectation_half = 0.0;  // same quadrature with frames 2*dt_out apart
  double richardson_rel = 0.0;    // |fine - coarse| / |fine|
  double horizon = 0.0;
  double final_mass = 0.0;        // |psi|^2 mass inside [a, b] at the horizon
};

// D psi0 by a backward Horner sweep over the stored frames:
// phi <- U^dagger(t_{k+1} -> t_k) phi + w_k A psi_k, trapezoid weights w_k.
// Each backward step is the exact inverse of the stored forward step.
DwellOperatorResult dwell_operator_field(const Evolution& evo, const Propagator& prop, double a, double b,
                                         bool check_horizon = true);

// Evolves psi0 to T and evaluates the weak value at x.
double dwell_operator_weak_value(const WaveFunction& psi0, double x, double a, double b, double horizon,
                                 const Propagator& prop);

// One integrand value <x|U^dagger(t) A U(t)|psi0>/<x|psi0> computed the
// direct way (forward, project, backward).
cplx dwell_integrand(const WaveFunction& psi0, double x, double a, double b, double t,
                     const Propagator& prop);

// CSV columns x, Re, Im.
void write_weak_value_csv(const ComplexField& f, std::ostream& os);

}  // namespace weaklab::weakval
