#pragma once

#include <cstdint>
#include <vector>

#include "weaklab/qgrid/field.hpp"
#include "weaklab/qgrid/wavefunction.hpp"

namespace weaklab::qgrid {

// psi = R exp(i S / hbar) with S unwrapped cumulatively along increasing x.
// Unwrapping restarts after every node; S is left at 0 on nodes and the
// point is flagged instead.
struct PolarFields {
  RVec modulus;                    // R >= 0
  RVec phase;                      // S, in action units
  std::vector<int> branch;         // S/hbar - arg(psi) in units of 2 pi
  std::vector<std::uint8_t> node;  // 1 where the phase is undefined
};

PolarFields polar_decompose(const WaveFunction& psi, double hbar = 1.0,
                            double threshold = kNodeThreshold);

}  // namespace weaklab::qgrid
