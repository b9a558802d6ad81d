#include "weaklab/qgrid/wavefunction.hpp"

#include <cmath>

#include "weaklab/common/errors.hpp"
#include "weaklab/common/fft.hpp"

namespace weaklab::qgrid {

WaveFunction::WaveFunction(Grid1D g, CVec amplitudes, double t)
    : grid(std::move(g)), psi(std::move(amplitudes)), time(t) {
  if (psi.size() != grid.n()) throw DimensionError("amplitude count does not match grid");
}

double WaveFunction::norm2() const {
  double s = 0.0;
  for (const auto& v : psi) s += std::norm(v);
  return s * grid.dx();
}

WaveFunction& WaveFunction::normalize() {
  const double nn = norm2();
  if (!(nn > 0.0) || !std::isfinite(nn)) throw NumericError("cannot normalize a null or non-finite state");
  const double s = 1.0 / std::sqrt(nn);
  for (auto& v : psi) v *= s;
  return *this;
}

RVec WaveFunction::density() const {
  RVec r(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) r[j] = std::norm(psi[j]);
  return r;
}

bool WaveFunction::finite() const {
  for (const auto& v : psi)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

cplx inner(const Grid1D& g, const CVec& a, const CVec& b) {
  if (a.size() != b.size() || a.size() != g.n()) throw DimensionError("inner product size mismatch");
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s * g.dx();
}

cplx inner(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a.grid, b.grid);
  return inner(a.grid, a.psi, b.psi);
}

CVec spectral_derivative(const Grid1D& g, const CVec& f, int order) {
  CVec out = f;
  fft::forward(out);
  const RVec k = g.wavenumbers();
  for (std::size_t m = 0; m < out.size(); ++m) {
    cplx factor = 1.0;
    for (int o = 0; o < order; ++o) factor *= cplx(0.0, k[m]);
    out[m] *= factor;
  }
  // Nyquist mode has no sign for odd derivatives
  if (order % 2 == 1 && out.size() % 2 == 0) out[out.size() / 2] = 0.0;
  fft::inverse(out);
  return out;
}

BandLimited::BandLimited(const Grid1D& g, CVec values) : grid_(g), coeffs_(std::move(values)) {
  if (coeffs_.size() != g.n()) throw DimensionError("interpolant size does not match grid");
  fft::forward(coeffs_);
  for (auto& c : coeffs_) c /= static_cast<double>(coeffs_.size());
  k_ = g.wavenumbers();
}

cplx BandLimited::at(double x) const {
  const double u = x - grid_.x_min();
  const RVec& k = k_;
  const std::size_t n = coeffs_.size();
  cplx s = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (n % 2 == 0 && m == n / 2)
      s += coeffs_[m] * std::cos(k[m] * u);
    else
      s += coeffs_[m] * std::exp(cplx(0.0, k[m] * u));
  }
  return s;
}

WaveFunction sample_function(const Grid1D& g, const std::function<cplx(double)>& f, bool normalize) {
  CVec a(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) a[j] = f(g.x(j));
  WaveFunction w(g, std::move(a));
  if (normalize) w.normalize();
  return w;
}

WaveFunction gaussian_packet(const Grid1D& g, double x0, double sigma0, double k0) {
  if (!(sigma0 > 0.0)) throw ConfigError("gaussian width must be positive");
  return sample_function(g, [=](double x) {
    const double u = x - x0;
    return std::exp(cplx(-u * u / (4.0 * sigma0 * sigma0), k0 * x));
  });
}

WaveFunction plane_wave(const Grid1D& g, long mode) {
  const double k = 2.0 * kPi * static_cast<double>(mode) / g.length();
  return sample_function(g, [=](double x) { return std::exp(cplx(0.0, k * x)); });
}

}  // namespace weaklab::qgrid
