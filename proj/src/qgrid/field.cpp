#include "weaklab/qgrid/field.hpp"

#include <algorithm>
#include <cmath>

#include "weaklab/common/errors.hpp"

namespace weaklab::qgrid {

namespace {

struct Stencil {
  std::size_t idx[4];
  double f;
};

Stencil locate(const Grid1D& g, double x) {
  const auto n = static_cast<long>(g.n());
  const double u = (x - g.x_min()) / g.dx();
  const double fl = std::floor(u);
  long j = static_cast<long>(fl);
  Stencil s{};
  s.f = u - fl;
  for (int q = 0; q < 4; ++q) s.idx[q] = static_cast<std::size_t>((((j - 1 + q) % n) + n) % n);
  return s;
}

}  // namespace

std::vector<std::uint8_t> non_node_mask(const CVec& psi, double threshold) {
  double mx = 0.0;
  for (const auto& v : psi) mx = std::max(mx, std::norm(v));
  std::vector<std::uint8_t> m(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) m[j] = std::norm(psi[j]) >= threshold * mx && mx > 0.0;
  return m;
}

bool GridField::valid_at(double x) const {
  const Stencil s = locate(grid, x);
  if (s.f == 0.0) return valid[s.idx[1]];
  return valid[s.idx[1]] && valid[s.idx[2]];
}

double GridField::at(double x, NodePolicy policy) const {
  const Stencil s = locate(grid, x);
  const double f = s.f;
  const std::size_t j0 = s.idx[1], j1 = s.idx[2];
  if (f == 0.0 && valid[j0]) return values[j0];
  if (valid[j0] && valid[j1]) {
    if (valid[s.idx[0]] && valid[s.idx[3]]) {
      const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
      const double w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
      const double w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
      const double w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
      return w0 * values[s.idx[0]] + w1 * values[j0] + w2 * values[j1] + w3 * values[s.idx[3]];
    }
    return (1.0 - f) * values[j0] + f * values[j1];
  }
  if (policy == NodePolicy::signal) throw NodeSingularity(x);
  // Nearest valid point, searching outward from the closer neighbour.
  const std::size_t n = grid.n();
  const std::size_t near = f < 0.5 ? j0 : j1;
  for (std::size_t r = 0; r <= n / 2; ++r) {
    const std::size_t a = (near + r) % n, b = (near + n - r) % n;
    const bool a_first = f >= 0.5;
    if (a_first && valid[a]) return values[a];
    if (valid[b]) return values[b];
    if (!a_first && valid[a]) return values[a];
  }
  return 0.0;
}

}  // namespace weaklab::qgrid
