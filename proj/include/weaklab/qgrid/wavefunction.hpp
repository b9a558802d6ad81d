#pragma once

#include <functional>

#include "weaklab/qgrid/grid.hpp"

namespace weaklab::qgrid {

// Amplitudes on the grid. Normalization is sum |psi_j|^2 dx = 1.
struct WaveFunction {
  Grid1D grid;
  CVec psi;
  double time = 0.0;

  WaveFunction(Grid1D g, CVec amplitudes, double t = 0.0);

  double norm2() const;  // sum |psi|^2 dx
  WaveFunction& normalize();
  RVec density() const;
  bool finite() const;
};

// <a|b> with the grid measure.
cplx inner(const Grid1D& g, const CVec& a, const CVec& b);
cplx inner(const WaveFunction& a, const WaveFunction& b);

// Spectral derivative of a periodic grid function; order 1 or 2.
CVec spectral_derivative(const Grid1D& g, const CVec& f, int order);

// Trigonometric interpolant of grid values; exact for band-limited data.
// O(n) per evaluation. The Nyquist mode enters as a cosine.
class BandLimited {
 public:
  BandLimited(const Grid1D& g, CVec values);
  cplx at(double x) const;

 private:
  Grid1D grid_;
  CVec coeffs_;
  RVec k_;
};

// exp(-(x-x0)^2/(4 sigma0^2) + i k0 x), normalized; sigma0 is the density width.
WaveFunction gaussian_packet(const Grid1D& g, double x0, double sigma0, double k0);
// exp(i k x) with k = 2 pi mode / L, normalized.
WaveFunction plane_wave(const Grid1D& g, long mode);
WaveFunction sample_function(const Grid1D& g, const std::function<cplx(double)>& f,
                             bool normalize = true);

}  // namespace weaklab::qgrid
