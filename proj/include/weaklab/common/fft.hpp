#pragma once

#include <span>

#include "weaklab/common/types.hpp"

namespace weaklab::fft {

// In-place complex DFTs backed by FFTW. Plans are cached per length and
// direction; execution is safe from several threads at once.
//
// forward: X_k = sum_j x_j exp(-2 pi i jk/n)
// inverse: x_j = (1/n) sum_k X_k exp(+2 pi i jk/n)
void forward(std::span<cplx> data);
void inverse(std::span<cplx> data);

}  // namespace weaklab::fft
