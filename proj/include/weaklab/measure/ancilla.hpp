#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "weaklab/common/types.hpp"

namespace weaklab::measure {

// Real Gaussian pointer a(y) = (pi sigma^2)^(-1/4) exp(-y^2 / 2 sigma^2),
// coupling lambda, and a symmetric outcome grid.
struct AncillaModel {
  double sigma = 1.0;
  double lambda = 1.0;
  double y_max = 8.0;  // grid is [-y_max, y_max]
  std::size_t ny = 1025;

  // Grid spanning +-(lambda * s_absmax + tails * sigma), odd point count,
  // at least min_points and at least 8 points per sigma.
  static AncillaModel make(double sigma, double lambda, double s_absmax, std::size_t min_points = 1024,
                           double tails = 8.0);

  double a(double y) const;
  double da(double y) const;     // a'(y) = -(y / sigma^2) a(y)
  double log_a(double y) const;  // ln a(y), finite far into the tails
  double dy() const { return 2.0 * y_max / static_cast<double>(ny - 1); }
  double y(std::size_t k) const { return -y_max + static_cast<double>(k) * dy(); }
  RVec y_grid() const;
};

// Trapezoid rule on the ancilla grid.
double integrate(const AncillaModel& anc, const RVec& f);

struct OverlapCheck {
  double s = 0.0, s_prime = 0.0;
  double numeric = 0.0;      // int y a(y - lambda s) a(y - lambda s') dy on the grid
  double first_order = 0.0;  // lambda (s + s') / 2
};

struct MomentReport {
  double norm = 0.0;       // int a^2 dy            (1)
  double y_a_da = 0.0;     // int y a a' dy         (-1/2)
  double y_da_da = 0.0;    // int y a'^2 dy         (0)
  double y_a_a = 0.0;      // int y a^2 dy          (0)
  double max_deviation = 0.0;
  std::vector<OverlapCheck> overlaps;
};

// Raises AncillaGridError when one of the three identities (or the norm)
// is off by more than `tolerance`.
MomentReport ancilla_moment_checks(const AncillaModel& anc,
                                   const std::vector<std::pair<double, double>>& shifted_pairs = {},
                                   double tolerance = 1e-6);

}  // namespace weaklab::measure
