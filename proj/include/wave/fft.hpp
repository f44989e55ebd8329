#pragma once

#include "wave/grid.hpp"

namespace wave {

/// In-place centered unitary DFT along `axis` of a contiguous array whose
/// shape is dims[0] x dims[1] x dims[2] with dims[0] fastest. DC lands at
/// floor(n/2). Extra batch dimensions are folded into dims[2] by the caller.
void centered_dft(std::span<cplx> data, std::array<Index, 3> const &dims, int axis, Direction dir);

/// O(n^2) reference used by tests.
void centered_dft_naive(std::span<cplx> data, std::array<Index, 3> const &dims, int axis, Direction dir);

} // namespace wave
