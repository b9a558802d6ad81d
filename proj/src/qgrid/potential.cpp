#include "weaklab/qgrid/potential.hpp"

#include <cmath>
#include <string>

#include "weaklab/common/errors.hpp"

namespace weaklab::qgrid {

double DriveField::at(double t) const {
  if (t < t_on || t >= t_off) return 0.0;
  return amplitude * std::cos(omega * t + phase);
}

double PotentialModel::static_at(double x, const Physics& phys) const {
  struct Visit {
    double x;
    const Physics& p;
    double operator()(const FreeSpace&) const { return 0.0; }
    double operator()(const Barrier& b) const { return (x >= b.left && x <= b.right) ? b.height : 0.0; }
    double operator()(const Harmonic& h) const {
      const double u = x - h.center;
      return 0.5 * p.mass * h.omega * h.omega * u * u;
    }
  };
  return std::visit(Visit{x, phys}, shape_);
}

RVec PotentialModel::static_values(const Grid1D& g, const Physics& phys) const {
  RVec v(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) v[j] = static_at(g.x(j), phys);
  return v;
}

RVec PotentialModel::values(const Grid1D& g, double t, const Physics& phys) const {
  RVec v = static_values(g, phys);
  const double e = field(t);
  if (e != 0.0)
    for (std::size_t j = 0; j < g.n(); ++j) v[j] -= phys.charge * e * g.x(j);
  return v;
}

void PotentialModel::check_resolution(const Grid1D& g) const {
  if (const auto* b = std::get_if<Barrier>(&shape_)) {
    if (!(b->right > b->left)) throw ConfigError("potential.right must exceed potential.left");
    std::size_t inside = 0;
    for (std::size_t j = 0; j < g.n(); ++j)
      if (g.x(j) >= b->left && g.x(j) <= b->right) ++inside;
    if (inside < 4)
      throw ConfigError("grid too coarse for barrier: " + std::to_string(inside) +
                        " point(s) across it, need at least 4");
  }
  if (const auto* h = std::get_if<Harmonic>(&shape_); h && !(h->omega > 0.0))
    throw ConfigError("potential.omega must be positive");
}

}  // namespace weaklab::qgrid
