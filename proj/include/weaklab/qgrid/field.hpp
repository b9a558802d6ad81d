#pragma once

#include <cstdint>
#include <vector>

#include "weaklab/qgrid/grid.hpp"

namespace weaklab::qgrid {

// |psi|^2 below this fraction of max |psi|^2 counts as a node.
inline constexpr double kNodeThreshold = 1e-12;

enum class NodePolicy {
  signal,  // throw NodeSingularity when the bracketing points are nodes
  clamp,   // fall back to the nearest valid grid value
};

// Real field sampled on the grid with a validity mask (false at nodes).
struct GridField {
  Grid1D grid;
  RVec values;
  std::vector<std::uint8_t> valid;

  // Cubic Lagrange interpolation on the 4-point periodic stencil around x.
  // Degrades to linear when an outer stencil point is invalid.
  double at(double x, NodePolicy policy = NodePolicy::signal) const;
  bool valid_at(double x) const;
};

// valid[j] = |psi_j|^2 >= threshold * max |psi|^2
std::vector<std::uint8_t> non_node_mask(const CVec& psi, double threshold = kNodeThreshold);

}  // namespace weaklab::qgrid
