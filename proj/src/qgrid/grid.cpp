#include "weaklab/qgrid/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "weaklab/common/errors.hpp"

namespace weaklab::qgrid {

Grid1D::Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  std::vector<std::string> bad;
  if (n < 16) bad.push_back("grid.n must be >= 16, got " + std::to_string(n));
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    bad.push_back("grid.x_max must exceed grid.x_min");
  if (!bad.empty()) throw ConfigError(bad);
  dx_ = (x_max - x_min) / static_cast<double>(n);
}

RVec Grid1D::points() const {
  RVec x(n_);
  for (std::size_t j = 0; j < n_; ++j) x[j] = this->x(j);
  return x;
}

RVec Grid1D::wavenumbers() const {
  RVec k(n_);
  const double dk = 2.0 * kPi / length();
  for (std::size_t m = 0; m < n_; ++m) {
    const auto mm = static_cast<long>(m);
    k[m] = dk * static_cast<double>(m < (n_ + 1) / 2 ? mm : mm - static_cast<long>(n_));
  }
  return k;
}

RVec Grid1D::kinetic_dispersion(const Physics& phys) const {
  RVec k = wavenumbers();
  const double h2m = phys.hbar * phys.hbar / phys.mass;
  for (auto& v : k) {
    if (phys.kinetic == KineticScheme::spectral)
      v = 0.5 * h2m * v * v;
    else
      v = h2m * (1.0 - std::cos(v * dx_)) / (dx_ * dx_);
  }
  return k;
}

void require_same_grid(const Grid1D& a, const Grid1D& b) {
  if (!(a == b)) throw DimensionError("operands live on different grids");
}

}  // namespace weaklab::qgrid
