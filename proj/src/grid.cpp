#include "wave/grid.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"

#include <cmath>

namespace wave {

char const *to_string(Axis a) noexcept {
  switch (a) {
  case Axis::X: return "x";
  case Axis::Y: return "y";
  case Axis::Z: return "z";
  }
  return "?";
}

Index Grid::dim(Axis a) const {
  switch (a) {
  case Axis::X: return nx;
  case Axis::Y: return ny;
  case Axis::Z: return nz;
  }
  return 0;
}

double Grid::spacing(Axis a) const {
  switch (a) {
  case Axis::X: return dx;
  case Axis::Y: return dy;
  case Axis::Z: return dz;
  }
  return 0.0;
}

double Grid::coord(Axis a, Index i) const {
  Index const n = dim(a);
  return static_cast<double>(i - n / 2) * spacing(a) + offset[static_cast<int>(a)];
}

void Grid::validate() const {
  require(nx >= 1 && ny >= 1 && nz >= 1, "grid dimensions must be >= 1");
  require(dx > 0 && dy > 0 && dz > 0, "grid spacings must be > 0");
}

ComplexVolume::ComplexVolume(Grid const &g, CVec d) : grid(g), data(std::move(d)) {
  g.validate();
  require(Index(data.size()) == g.size(), "volume data length does not match grid");
}

bool ComplexVolume::all_finite() const {
  for (auto const &v : data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

ComplexVolume dft_axis(ComplexVolume v, Axis axis, Direction dir) {
  int const a = static_cast<int>(axis);
  Domain const target = dir == Direction::Forward ? Domain::Frequency : Domain::Image;
  if (v.domain[a] == target)
    fail(std::string("dft_axis: axis ") + to_string(axis) + " is already in the requested domain");
  centered_dft(v.data, {v.grid.nx, v.grid.ny, v.grid.nz}, a, dir);
  v.domain[a] = target;
  return v;
}

} // namespace wave
