#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wave {

using cplx = std::complex<double>;
using Index = std::ptrdiff_t;
using CVec = std::vector<cplx>;

inline constexpr double pi = 3.14159265358979323846;

} // namespace wave
