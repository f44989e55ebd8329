#pragma once

#include "wave/types.hpp"

#include <array>

namespace wave {

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class Domain { Image, Frequency };
enum class Direction { Forward, Inverse };

char const *to_string(Axis a) noexcept;

/// Cartesian sampling grid. x is readout, y phase encode, z slice.
/// Index i along an axis of length n sits at (i - floor(n/2)) * spacing + offset.
struct Grid {
  Index nx = 1, ny = 1, nz = 1;
  double dx = 1.0, dy = 1.0, dz = 1.0;
  std::array<double, 3> offset{0.0, 0.0, 0.0};

  Index size() const { return nx * ny * nz; }
  Index dim(Axis a) const;
  double spacing(Axis a) const;
  double coord(Axis a, Index i) const;
  Index index(Index x, Index y, Index z) const { return x + nx * (y + ny * z); }
  void validate() const;

  friend bool operator==(Grid const &, Grid const &) = default;
};

/// Dense complex volume, x fastest. Each axis carries its own domain tag.
struct ComplexVolume {
  Grid grid;
  CVec data;
  std::array<Domain, 3> domain{Domain::Image, Domain::Image, Domain::Image};

  ComplexVolume() = default;
  explicit ComplexVolume(Grid const &g) : grid(g), data(static_cast<std::size_t>(g.size())) { g.validate(); }
  ComplexVolume(Grid const &g, CVec d);

  cplx &operator()(Index x, Index y, Index z) { return data[static_cast<std::size_t>(grid.index(x, y, z))]; }
  cplx operator()(Index x, Index y, Index z) const { return data[static_cast<std::size_t>(grid.index(x, y, z))]; }
  bool all_finite() const;
};

/// Centered unitary DFT along one axis. Throws if the axis is already in the
/// requested output domain.
ComplexVolume dft_axis(ComplexVolume v, Axis axis, Direction dir);

} // namespace wave
