#include "weaklab/measure/ancilla.hpp"

#include <algorithm>
#include <cmath>

#include "weaklab/common/errors.hpp"

namespace weaklab::measure {

AncillaModel AncillaModel::make(double sigma, double lambda, double s_absmax, std::size_t min_points, double tails) {
  if (!(sigma > 0.0)) throw ConfigError("ancilla sigma must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("ancilla lambda must be non-negative");
  AncillaModel m;
  m.sigma = sigma;
  m.lambda = lambda;
  m.y_max = lambda * std::abs(s_absmax) + tails * sigma;
  const double per_sigma = 8.0;
  auto n = static_cast<std::size_t>(std::ceil(2.0 * m.y_max / (sigma / per_sigma))) + 1;
  n = std::max(n, min_points + 1);
  if (n % 2 == 0) ++n;
  m.ny = n;
  return m;
}

double AncillaModel::a(double y) const { return std::exp(log_a(y)); }

double AncillaModel::da(double y) const { return -(y / (sigma * sigma)) * a(y); }

double AncillaModel::log_a(double y) const {
  return -0.25 * std::log(kPi * sigma * sigma) - y * y / (2.0 * sigma * sigma);
}

RVec AncillaModel::y_grid() const {
  RVec y(ny);
  for (std::size_t k = 0; k < ny; ++k) y[k] = this->y(k);
  return y;
}

double integrate(const AncillaModel& anc, const RVec& f) {
  if (f.size() != anc.ny) throw DimensionError("integrand does not match the outcome grid");
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
  return s * anc.dy();
}

MomentReport ancilla_moment_checks(const AncillaModel& anc, const std::vector<std::pair<double, double>>& pairs,
                                   double tolerance) {
  const std::size_t n = anc.ny;
  RVec f0(n), f1(n), f2(n), f3(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double y = anc.y(k), a = anc.a(y), d = anc.da(y);
    f0[k] = a * a;
    f1[k] = y * a * d;
    f2[k] = y * d * d;
    f3[k] = y * a * a;
  }
  MomentReport r;
  r.norm = integrate(anc, f0);
  r.y_a_da = integrate(anc, f1);
  r.y_da_da = integrate(anc, f2);
  r.y_a_a = integrate(anc, f3);
  r.max_deviation = std::max({std::abs(r.norm - 1.0), std::abs(r.y_a_da + 0.5), std::abs(r.y_da_da),
                              std::abs(r.y_a_a)});
  for (const auto& [s, sp] : pairs) {
    OverlapCheck c{s, sp, 0.0, 0.5 * anc.lambda * (s + sp)};
    for (std::size_t k = 0; k < n; ++k) {
      const double y = anc.y(k);
      f0[k] = y * anc.a(y - anc.lambda * s) * anc.a(y - anc.lambda * sp);
    }
    c.numeric = integrate(anc, f0);
    r.overlaps.push_back(c);
  }
  if (!(r.max_deviation <= tolerance))
    throw AncillaGridError("ancilla moment identities off by " + std::to_string(r.max_deviation) +
                           "; outcome grid too coarse or too narrow");
  return r;
}

}  // namespace weaklab::measure
