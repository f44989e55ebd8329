#pragma once

#include "wave/types.hpp"

#include <cstdint>
#include <functional>

namespace wave {

using LinearMap = std::function<CVec(CVec const &)>;

/// Seeded complex standard normal vector (unit variance per real/imag part).
CVec random_cvec(Index n, std::uint64_t seed);

/// max over `pairs` seeded (x, y) of |<Ax, y> - <x, A^H y>| / (|Ax| |y|).
double adjoint_dot_test(LinearMap const &apply, LinearMap const &apply_adjoint, Index in_size, Index out_size,
                        std::uint64_t seed, int pairs = 3);

} // namespace wave
