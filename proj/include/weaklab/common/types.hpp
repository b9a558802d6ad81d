#pragma once

#include <complex>
#include <vector>

namespace weaklab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Digits after the point in scientific CSV output (17 significant).
inline constexpr int kCsvPrecision = 16;

}  // namespace weaklab
