#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "weaklab/measure/ancilla.hpp"
#include "weaklab/qgrid/operator.hpp"
#include "weaklab/qgrid/propagator.hpp"

namespace weaklab::measure {

using qgrid::SpectralOperator;
using qgrid::Spectrum;
using qgrid::WaveFunction;

// The free evolution between the two measurements, acting on grid vectors.
using UnitaryMap = std::function<CVec(const CVec&)>;

// U = exp(-i H duration / hbar) starting at t0.
UnitaryMap evolution_map(const qgrid::Propagator& prop, double duration, double t0 = 0.0);

// S is weakly measured at t1, G projectively at t2 = t1 + duration of U.
struct Protocol {
  SpectralOperator S;
  SpectralOperator G;
  Spectrum S_spec;
  Spectrum G_spec;
  UnitaryMap U;
  AncillaModel ancilla;
};

Protocol make_protocol(const SpectralOperator& S, const SpectralOperator& G, UnitaryMap U, const AncillaModel& anc);

// Joint system-ancilla state after premeasurement: amplitude c_i a(y - lambda s_i)
// on the retained eigenvectors of S.
struct EntangledState {
  CVec coeffs;                      // c_i = <s_i|psi>
  RVec eigenvalues;                 // s_i
  std::vector<std::size_t> index;   // position in the full spectrum
  AncillaModel ancilla;
  double retained = 0.0;            // sum |c_i|^2
};

// Keeps the largest components until the discarded weight is below
// `drop`. Raises BasisCoverageError when the spectrum covers less than
// 1 - coverage of the state.
EntangledState premeasure(const WaveFunction& psi, const Spectrum& S, const AncillaModel& anc,
                          double coverage = 1e-8, double drop = 1e-12);

// P(y) = sum_i |c_i|^2 a(y - lambda s_i)^2 on the outcome grid.
RVec readout_marginal(const EntangledState& ent);
double marginal_mean(const EntangledState& ent, const RVec& marginal);

struct Readout {
  double y = 0.0;
  CVec collapsed;     // normalized coefficients over the retained basis
  double weight = 0.0;  // squared norm before normalization, equals P(y)
  std::size_t branch = 0;
};

// Draws y from the marginal and collapses the system state.
template <class Engine>
Readout readout_sample(const EntangledState& ent, Engine& eng);
Readout collapse(const EntangledState& ent, double y);
CVec synthesize(const EntangledState& ent, const Spectrum& S, const CVec& coeffs);

// P_j(y_k): continuous in y_k on the ancilla grid, discrete in the second
// outcome y_w = lambda g_j because the second ancilla is in the sharp limit.
struct JointOutcomeDistribution {
  RVec yk_grid;
  RVec yw_values;               // lambda g_j
  std::vector<RVec> density;    // density[j][k]
  double dy = 0.0;
  double total() const;         // sum_j int P_j dy
  double min_value() const;
};

// c_{j,i} = <g_j|U|s_i> for the retained components.
Eigen::MatrixXcd transition_matrix(const EntangledState& ent, const Protocol& p);

JointOutcomeDistribution two_time_joint(const WaveFunction& psi, const Protocol& p);
double two_time_correlation(const JointOutcomeDistribution& joint);
// lambda^2 Re <psi|U^dagger G U S|psi>, no ancilla.
double ideal_weak_correlation(const WaveFunction& psi, const SpectralOperator& S, const SpectralOperator& G,
                              const UnitaryMap& U, double lambda);

void write_joint_csv(const JointOutcomeDistribution& joint, std::ostream& os);

// Norms of the four Taylor terms of the collapsed state
// a(yw)a(yk) U psi, -lambda a(yw)a'(yk) U S psi, -lambda a'(yw)a(yk) G U psi,
// lambda^2 a'(yw)a'(yk) G U S psi. Logs stay finite deep in the tails.
struct PerturbationTerms {
  double log_norm[4] = {0, 0, 0, 0};
  double norm[4] = {0, 0, 0, 0};
  double ratio_1_4 = 0.0;  // |term 1| / |term 4|
};

PerturbationTerms perturbation_decomposition(const WaveFunction& psi, double yk, double yw, const SpectralOperator& S,
                                             const SpectralOperator& G, const UnitaryMap& U, const AncillaModel& anc);

// Outcome y (with yk = yw = y) where terms 1 and 4 have equal norm.
double perturbation_crossover(const WaveFunction& psi, const SpectralOperator& S, const SpectralOperator& G,
                              const UnitaryMap& U, const AncillaModel& anc);

// Index of the G eigenvalue selected by g_a (nearest, within half a gap).
std::size_t post_selection_index(const Spectrum& G, double g_a);

// Re[<g_a|S U psi>/<g_a|U psi>]
cplx aav_reference(const WaveFunction& psi, const Protocol& p, std::size_t a);

// (1/lambda) int y P_a(y) dy / int P_a(y) dy by quadrature.
double operational_weak_value_exact(const WaveFunction& psi, const Protocol& p, std::size_t a);

struct MonteCarloResult {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::size_t n_post = 0;
  double post_fraction = 0.0;
};

// N simulated experiments with per-experiment random streams. Each one
// premeasures, reads out y_k, collapses, evolves and samples the G outcome;
// y_k is kept when the outcome is g_a. Optional JSON-lines log.
MonteCarloResult operational_weak_value_mc(const WaveFunction& psi, const Protocol& p, std::size_t a,
                                           std::size_t N, std::uint64_t seed, std::ostream* log = nullptr);

// ---- template implementation ------------------------------------------

template <class Engine>
Readout readout_sample(const EntangledState& ent, Engine& eng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(eng) * ent.retained;
  std::size_t i = 0;
  for (; i + 1 < ent.coeffs.size(); ++i) {
    u -= std::norm(ent.coeffs[i]);
    if (u < 0.0) break;
  }
  const double sig = ent.ancilla.sigma / std::sqrt(2.0);
  std::normal_distribution<double> gauss(ent.ancilla.lambda * ent.eigenvalues[i], sig);
  Readout r = collapse(ent, gauss(eng));
  r.branch = i;
  return r;
}

}  // namespace weaklab::measure
