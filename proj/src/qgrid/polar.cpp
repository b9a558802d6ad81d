#include "weaklab/qgrid/polar.hpp"

#include <cmath>

namespace weaklab::qgrid {

PolarFields polar_decompose(const WaveFunction& psi, double hbar, double threshold) {
  const std::size_t n = psi.psi.size();
  const auto ok = non_node_mask(psi.psi, threshold);
  PolarFields p{RVec(n), RVec(n, 0.0), std::vector<int>(n, 0), std::vector<std::uint8_t>(n, 0)};
  bool restart = true;
  double prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    p.modulus[j] = std::abs(psi.psi[j]);
    if (!ok[j]) {
      p.node[j] = 1;
      restart = true;
      continue;
    }
    const double a = std::arg(psi.psi[j]);
    double theta = a;
    if (!restart) {
      double d = a - std::remainder(prev, 2.0 * kPi);
      d = std::remainder(d, 2.0 * kPi);
      theta = prev + d;
    }
    restart = false;
    prev = theta;
    p.branch[j] = static_cast<int>(std::lround((theta - a) / (2.0 * kPi)));
    p.phase[j] = hbar * theta;
  }
  return p;
}

}  // namespace weaklab::qgrid
