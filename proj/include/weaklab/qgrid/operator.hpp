#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

#include "weaklab/qgrid/potential.hpp"
#include "weaklab/qgrid/wavefunction.hpp"

namespace weaklab::qgrid {

// Eigen-expansion of an observable. Eigenvectors are normalized with the
// grid measure, <s_i|s_j> = sum conj(s_i) s_j dx = delta_ij.
class Spectrum {
 public:
  enum class Basis { delta, fourier, dense };

  // Position-like operators: eigenvector j is the grid delta at x_j.
  static Spectrum delta(const Grid1D& g, RVec eigenvalues);
  // Momentum-like operators: eigenvector m is exp(i k_m x)/sqrt(L).
  static Spectrum fourier(const Grid1D& g, RVec eigenvalues);
  // Explicit eigenvectors, columns orthonormal in the plain Euclidean sense.
  static Spectrum dense(const Grid1D& g, RVec eigenvalues, Eigen::MatrixXcd unit_columns);

  Basis basis() const noexcept { return basis_; }
  const Grid1D& grid() const noexcept { return grid_; }
  const RVec& eigenvalues() const noexcept { return evals_; }
  std::size_t size() const noexcept { return evals_.size(); }

  cplx coefficient(std::size_t i, const CVec& psi) const;
  CVec coefficients(const CVec& psi) const;
  CVec eigenvector(std::size_t i) const;
  // sum_i c_i |s_i> over the listed indices.
  CVec synthesize(std::span<const std::size_t> idx, std::span<const cplx> c) const;
  CVec synthesize(const CVec& all_coefficients) const;
  // sum_i s_i |s_i><s_i|psi>
  CVec apply(const CVec& psi) const;

 private:
  Spectrum(Basis b, Grid1D g, RVec e) : basis_(b), grid_(std::move(g)), evals_(std::move(e)) {}
  Basis basis_;
  Grid1D grid_;
  RVec evals_;
  Eigen::MatrixXcd vecs_;  // dense only, unit columns
};

enum class OperatorKind { position, momentum, hamiltonian, window, diagonal, dense };

class SpectralOperator {
 public:
  static SpectralOperator position(const Grid1D& g);
  static SpectralOperator momentum(const Grid1D& g, const Physics& phys);
  static SpectralOperator hamiltonian(const Grid1D& g, const Physics& phys, RVec potential);
  // Projector onto [a, b]. Weights are the integrals of the linear hat
  // functions over [a, b], so <psi|A|psi> is the exact integral of the
  // piecewise-linear density over the window.
  static SpectralOperator window(const Grid1D& g, double a, double b);
  static SpectralOperator diagonal(const Grid1D& g, RVec values, std::string label);
  static SpectralOperator dense(const Grid1D& g, Eigen::MatrixXcd matrix, std::string label);

  OperatorKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  const Grid1D& grid() const noexcept { return grid_; }
  const Physics& physics() const noexcept { return phys_; }
  // Diagonal part (potential for H, weights for window, x for position).
  const RVec& diagonal_values() const noexcept { return diag_; }

  CVec apply(const CVec& psi) const;
  WaveFunction apply(const WaveFunction& psi) const;

  // Eigendecomposition. Dense for the Hamiltonian (n <= 2048); implicit
  // bases for position, window and momentum. `lowest` keeps only the k
  // smallest eigenvalues of a dense decomposition.
  Spectrum decompose(std::optional<std::size_t> lowest = std::nullopt) const;

 private:
  SpectralOperator(OperatorKind k, Grid1D g, std::string label)
      : kind_(k), grid_(std::move(g)), label_(std::move(label)) {}
  OperatorKind kind_;
  Grid1D grid_;
  std::string label_;
  Physics phys_{};
  RVec diag_;
  Eigen::MatrixXcd matrix_;
};

inline constexpr std::size_t kMaxDenseN = 2048;

// H = T + V(t). The drive term can be left out to get the system
// Hamiltonian used for local energies and work.
SpectralOperator build_hamiltonian(const Grid1D& g, const PotentialModel& pot, double t,
                                   const Physics& phys, bool include_drive = true);

// <psi|A|psi>. Throws DimensionError on grid mismatch and NumericError if
// the imaginary residue is not negligible.
double expectation(const SpectralOperator& op, const WaveFunction& psi);
cplx expectation_complex(const SpectralOperator& op, const WaveFunction& psi);

// Hat-function weights of [a, b] on the periodic grid, in units of dx.
RVec window_weights(const Grid1D& g, double a, double b);

}  // namespace weaklab::qgrid
