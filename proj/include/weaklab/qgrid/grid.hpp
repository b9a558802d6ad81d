#pragma once

#include <cstddef>

#include "weaklab/common/types.hpp"

namespace weaklab::qgrid {

enum class KineticScheme { spectral, stencil };

// Physical constants. Natural units by default.
struct Physics {
  double hbar = 1.0;
  double mass = 1.0;
  double charge = 1.0;
  KineticScheme kinetic = KineticScheme::spectral;
};

// Uniform periodic grid. Points are x_j = x_min + j*dx for j in [0, n);
// x_max is identified with x_min.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }
  bool periodic() const noexcept { return true; }

  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }
  RVec points() const;
  bool contains(double x) const noexcept { return x >= x_min_ && x < x_max_; }

  // Angular wavenumbers in FFT storage order; index n/2 holds -pi/dx.
  RVec wavenumbers() const;
  // Kinetic energy per Fourier mode for the chosen scheme.
  RVec kinetic_dispersion(const Physics& phys) const;

  bool operator==(const Grid1D& o) const noexcept {
    return x_min_ == o.x_min_ && x_max_ == o.x_max_ && n_ == o.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

void require_same_grid(const Grid1D& a, const Grid1D& b);

}  // namespace weaklab::qgrid
