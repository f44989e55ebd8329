#pragma once

#include "wave/grid.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wave {

struct Ellipsoid {
  std::array<double, 3> center{0, 0, 0}; // mm
  std::array<double, 3> semi{1, 1, 1};   // mm
  cplx amplitude{1.0, 0.0};
};

/// Sum of ellipsoids times an optional smooth background phase
/// phi(r) = c0 + sum_a (lin[a] * r_a + quad[a] * r_a^2), r in mm.
struct PhantomSpec {
  std::vector<Ellipsoid> ellipsoids;
  double phase_const = 0.0;
  std::array<double, 3> phase_linear{0, 0, 0};
  std::array<double, 3> phase_quadratic{0, 0, 0};

  void validate() const;
};

PhantomSpec default_phantom_spec();
ComplexVolume make_phantom(Grid const &grid, PhantomSpec const &spec);

/// Coil sensitivities stored coil-major: data[c * grid.size() + voxel].
struct CoilMaps {
  Grid grid;
  Index ncoils = 0;
  CVec data;

  std::span<cplx const> coil(Index c) const {
    return {data.data() + c * grid.size(), static_cast<std::size_t>(grid.size())};
  }
  std::span<cplx> coil(Index c) { return {data.data() + c * grid.size(), static_cast<std::size_t>(grid.size())}; }
  /// sqrt(sum_c |C_c|^2) per voxel.
  std::vector<double> rss() const;
};

struct CoilSpec {
  Index ncoils = 16;
  double ring_radius_mm = 120.0;
  double lobe_width_mm = 60.0;
  double z_offset_mm = 50.0;
  Index z_rows = 2;
  double phase_slope = 0.02; // rad/mm toward the coil
  std::uint64_t seed = 7;
};

CoilMaps make_coil_maps(Grid const &grid, CoilSpec const &spec);
/// ncoils identical maps of ones.
CoilMaps uniform_coils(Grid const &grid, Index ncoils = 1);

/// Adds i.i.d. complex Gaussian noise, std sigma per real and imaginary part.
void add_noise(std::span<cplx> data, double sigma, std::uint64_t seed);

/// Smooth unit-modulus phase maps, one per entry, band-limited to
/// `max_cycles` cycles across the field of view in x and y and a linear z term.
std::vector<CVec> make_smooth_phases(Grid const &grid, Index count, double amplitude_rad, int max_cycles,
                                     std::uint64_t seed);

/// Boolean support: |v| > threshold * max|v|.
std::vector<char> support_mask(ComplexVolume const &v, double threshold = 1e-6);

} // namespace wave
