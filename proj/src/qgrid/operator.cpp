#include "weaklab/qgrid/operator.hpp"

#include <algorithm>
#include <cmath>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/fft.hpp"

namespace weaklab::qgrid {

namespace {

Eigen::Map<const Eigen::VectorXcd> view(const CVec& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// Fix the arbitrary phase of an eigenvector: largest entry real positive.
void fix_phase(Eigen::Ref<Eigen::VectorXcd> u) {
  Eigen::Index imax = 0;
  u.cwiseAbs().maxCoeff(&imax);
  const cplx p = u(imax) / std::abs(u(imax));
  u *= std::conj(p);
}

// Cumulative integral of the unit hat function centered at 0.
double hat_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u <= 0.0) return 0.5 * (1.0 + u) * (1.0 + u);
  if (u <= 1.0) return 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
  return 1.0;
}

}  // namespace

// ---- Spectrum ---------------------------------------------------------

Spectrum Spectrum::delta(const Grid1D& g, RVec eigenvalues) {
  if (eigenvalues.size() != g.n()) throw DimensionError("delta spectrum needs n eigenvalues");
  return Spectrum(Basis::delta, g, std::move(eigenvalues));
}

Spectrum Spectrum::fourier(const Grid1D& g, RVec eigenvalues) {
  if (eigenvalues.size() != g.n()) throw DimensionError("fourier spectrum needs n eigenvalues");
  return Spectrum(Basis::fourier, g, std::move(eigenvalues));
}

Spectrum Spectrum::dense(const Grid1D& g, RVec eigenvalues, Eigen::MatrixXcd unit_columns) {
  if (static_cast<std::size_t>(unit_columns.rows()) != g.n() ||
      static_cast<std::size_t>(unit_columns.cols()) != eigenvalues.size())
    throw DimensionError("dense spectrum shape mismatch");
  Spectrum s(Basis::dense, g, std::move(eigenvalues));
  s.vecs_ = std::move(unit_columns);
  return s;
}

cplx Spectrum::coefficient(std::size_t i, const CVec& psi) const {
  if (psi.size() != grid_.n()) throw DimensionError("state does not match spectrum grid");
  const double dx = grid_.dx();
  switch (basis_) {
    case Basis::delta:
      return psi[i] * std::sqrt(dx);
    case Basis::fourier: {
      const double k = grid_.wavenumbers()[i];
      cplx s = 0.0;
      for (std::size_t j = 0; j < psi.size(); ++j) s += std::exp(cplx(0.0, -k * grid_.x(j))) * psi[j];
      return s * dx / std::sqrt(grid_.length());
    }
    case Basis::dense:
      return std::sqrt(dx) * vecs_.col(static_cast<Eigen::Index>(i)).dot(view(psi));
  }
  return 0.0;
}

CVec Spectrum::coefficients(const CVec& psi) const {
  if (psi.size() != grid_.n()) throw DimensionError("state does not match spectrum grid");
  const double dx = grid_.dx();
  CVec c;
  switch (basis_) {
    case Basis::delta:
      c = psi;
      for (auto& v : c) v *= std::sqrt(dx);
      break;
    case Basis::fourier: {
      c = psi;
      fft::forward(c);
      const RVec k = grid_.wavenumbers();
      const double pre = dx / std::sqrt(grid_.length());
      for (std::size_t m = 0; m < c.size(); ++m) c[m] *= pre * std::exp(cplx(0.0, -k[m] * grid_.x_min()));
      break;
    }
    case Basis::dense: {
      Eigen::VectorXcd r = std::sqrt(dx) * (vecs_.adjoint() * view(psi));
      c.assign(r.data(), r.data() + r.size());
      break;
    }
  }
  return c;
}

CVec Spectrum::eigenvector(std::size_t i) const {
  CVec c(1, 1.0);
  const std::size_t idx[1] = {i};
  return synthesize(idx, c);
}

CVec Spectrum::synthesize(std::span<const std::size_t> idx, std::span<const cplx> c) const {
  if (idx.size() != c.size()) throw DimensionError("index/coefficient count mismatch");
  const std::size_t n = grid_.n();
  const double dx = grid_.dx();
  CVec out(n, 0.0);
  switch (basis_) {
    case Basis::delta:
      for (std::size_t q = 0; q < idx.size(); ++q) out[idx[q]] += c[q] / std::sqrt(dx);
      break;
    case Basis::fourier: {
      const RVec k = grid_.wavenumbers();
      for (std::size_t q = 0; q < idx.size(); ++q)
        out[idx[q]] += c[q] * std::exp(cplx(0.0, k[idx[q]] * grid_.x_min()));
      fft::inverse(out);
      const double pre = static_cast<double>(n) / std::sqrt(grid_.length());
      for (auto& v : out) v *= pre;
      break;
    }
    case Basis::dense: {
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t q = 0; q < idx.size(); ++q) acc += c[q] * vecs_.col(static_cast<Eigen::Index>(idx[q]));
      acc /= std::sqrt(dx);
      out.assign(acc.data(), acc.data() + acc.size());
      break;
    }
  }
  return out;
}

CVec Spectrum::synthesize(const CVec& all) const {
  if (all.size() != size()) throw DimensionError("coefficient count mismatch");
  std::vector<std::size_t> idx(size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return synthesize(idx, all);
}

CVec Spectrum::apply(const CVec& psi) const {
  CVec c = coefficients(psi);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= evals_[i];
  return synthesize(c);
}

// ---- SpectralOperator -------------------------------------------------

SpectralOperator SpectralOperator::position(const Grid1D& g) {
  SpectralOperator op(OperatorKind::position, g, "position");
  op.diag_ = g.points();
  return op;
}

SpectralOperator SpectralOperator::momentum(const Grid1D& g, const Physics& phys) {
  SpectralOperator op(OperatorKind::momentum, g, "momentum");
  op.phys_ = phys;
  return op;
}

SpectralOperator SpectralOperator::hamiltonian(const Grid1D& g, const Physics& phys, RVec potential) {
  if (potential.size() != g.n()) throw DimensionError("potential does not match grid");
  for (double v : potential)
    if (!std::isfinite(v)) throw NumericError("potential is not finite");
  SpectralOperator op(OperatorKind::hamiltonian, g, "hamiltonian");
  op.phys_ = phys;
  op.diag_ = std::move(potential);
  return op;
}

SpectralOperator SpectralOperator::window(const Grid1D& g, double a, double b) {
  if (!(b > a)) throw ConfigError("window needs b > a");
  SpectralOperator op(OperatorKind::window, g, "window");
  op.diag_ = window_weights(g, a, b);
  return op;
}

SpectralOperator SpectralOperator::diagonal(const Grid1D& g, RVec values, std::string label) {
  if (values.size() != g.n()) throw DimensionError("diagonal does not match grid");
  SpectralOperator op(OperatorKind::diagonal, g, std::move(label));
  op.diag_ = std::move(values);
  return op;
}

SpectralOperator SpectralOperator::dense(const Grid1D& g, Eigen::MatrixXcd matrix, std::string label) {
  const auto n = static_cast<Eigen::Index>(g.n());
  if (matrix.rows() != n || matrix.cols() != n) throw DimensionError("dense operator shape mismatch");
  if ((matrix - matrix.adjoint()).norm() > 1e-10 * (1.0 + matrix.norm()))
    throw NumericError("dense operator is not Hermitian");
  SpectralOperator op(OperatorKind::dense, g, std::move(label));
  op.matrix_ = std::move(matrix);
  return op;
}

CVec SpectralOperator::apply(const CVec& psi) const {
  const std::size_t n = grid_.n();
  if (psi.size() != n) throw DimensionError("state does not match operator grid");
  CVec out(n);
  switch (kind_) {
    case OperatorKind::position:
    case OperatorKind::window:
    case OperatorKind::diagonal:
      for (std::size_t j = 0; j < n; ++j) out[j] = diag_[j] * psi[j];
      break;
    case OperatorKind::momentum: {
      out = psi;
      fft::forward(out);
      const RVec k = grid_.wavenumbers();
      for (std::size_t m = 0; m < n; ++m) out[m] *= phys_.hbar * k[m];
      fft::inverse(out);
      break;
    }
    case OperatorKind::hamiltonian: {
      if (phys_.kinetic == KineticScheme::spectral) {
        out = psi;
        fft::forward(out);
        const RVec t = grid_.kinetic_dispersion(phys_);
        for (std::size_t m = 0; m < n; ++m) out[m] *= t[m];
        fft::inverse(out);
      } else {
        const double beta = phys_.hbar * phys_.hbar / (2.0 * phys_.mass * grid_.dx() * grid_.dx());
        for (std::size_t j = 0; j < n; ++j)
          out[j] = beta * (2.0 * psi[j] - psi[(j + n - 1) % n] - psi[(j + 1) % n]);
      }
      for (std::size_t j = 0; j < n; ++j) out[j] += diag_[j] * psi[j];
      break;
    }
    case OperatorKind::dense: {
      Eigen::VectorXcd r = matrix_ * view(psi);
      out.assign(r.data(), r.data() + r.size());
      break;
    }
  }
  return out;
}

WaveFunction SpectralOperator::apply(const WaveFunction& psi) const {
  require_same_grid(grid_, psi.grid);
  return WaveFunction(psi.grid, apply(psi.psi), psi.time);
}

Spectrum SpectralOperator::decompose(std::optional<std::size_t> lowest) const {
  const std::size_t n = grid_.n();
  switch (kind_) {
    case OperatorKind::position:
    case OperatorKind::window:
    case OperatorKind::diagonal:
      return Spectrum::delta(grid_, diag_);
    case OperatorKind::momentum: {
      RVec e = grid_.wavenumbers();
      for (auto& v : e) v *= phys_.hbar;
      return Spectrum::fourier(grid_, std::move(e));
    }
    case OperatorKind::hamiltonian: {
      if (n > kMaxDenseN) throw ConfigError("dense eigendecomposition limited to n <= 2048");
      const RVec disp = grid_.kinetic_dispersion(phys_);
      CVec t(disp.begin(), disp.end());
      fft::inverse(t);
      const auto nn = static_cast<Eigen::Index>(n);
      Eigen::MatrixXd h(nn, nn);
      for (Eigen::Index j = 0; j < nn; ++j)
        for (Eigen::Index l = 0; l < nn; ++l) h(j, l) = t[static_cast<std::size_t>((j - l + nn) % nn)].real();
      for (Eigen::Index j = 0; j < nn; ++j) h(j, j) += diag_[static_cast<std::size_t>(j)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      if (es.info() != Eigen::Success) throw NumericError("Hamiltonian eigensolver failed");
      const Eigen::Index keep = lowest ? std::min<Eigen::Index>(nn, static_cast<Eigen::Index>(*lowest)) : nn;
      Eigen::MatrixXcd u = es.eigenvectors().leftCols(keep).cast<cplx>();
      for (Eigen::Index c = 0; c < keep; ++c) fix_phase(u.col(c));
      RVec e(es.eigenvalues().data(), es.eigenvalues().data() + keep);
      return Spectrum::dense(grid_, std::move(e), std::move(u));
    }
    case OperatorKind::dense: {
      if (n > kMaxDenseN) throw ConfigError("dense eigendecomposition limited to n <= 2048");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_);
      if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
      const auto nn = static_cast<Eigen::Index>(n);
      const Eigen::Index keep = lowest ? std::min<Eigen::Index>(nn, static_cast<Eigen::Index>(*lowest)) : nn;
      Eigen::MatrixXcd u = es.eigenvectors().leftCols(keep);
      for (Eigen::Index c = 0; c < keep; ++c) fix_phase(u.col(c));
      RVec e(es.eigenvalues().data(), es.eigenvalues().data() + keep);
      return Spectrum::dense(grid_, std::move(e), std::move(u));
    }
  }
  throw NumericError("unknown operator kind");
}

SpectralOperator build_hamiltonian(const Grid1D& g, const PotentialModel& pot, double t,
                                   const Physics& phys, bool include_drive) {
  pot.check_resolution(g);
  RVec v = include_drive ? pot.values(g, t, phys) : pot.static_values(g, phys);
  return SpectralOperator::hamiltonian(g, phys, std::move(v));
}

cplx expectation_complex(const SpectralOperator& op, const WaveFunction& psi) {
  require_same_grid(op.grid(), psi.grid);
  return inner(psi.grid, psi.psi, op.apply(psi.psi));
}

double expectation(const SpectralOperator& op, const WaveFunction& psi) {
  const cplx e = expectation_complex(op, psi);
  if (std::abs(e.imag()) > 1e-9 * (1.0 + std::abs(e.real())))
    throw NumericError("expectation value has a non-negligible imaginary part");
  return e.real();
}

RVec window_weights(const Grid1D& g, double a, double b) {
  const std::size_t n = g.n();
  RVec w(n, 0.0);
  const double L = g.length(), dx = g.dx();
  if (b - a >= L) {
    std::fill(w.begin(), w.end(), 1.0);
    return w;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (int img = -2; img <= 2; ++img) {
      const double c = g.x(j) + img * L;
      s += hat_cdf((b - c) / dx) - hat_cdf((a - c) / dx);
    }
    w[j] = s;
  }
  return w;
}

}  // namespace weaklab::qgrid
