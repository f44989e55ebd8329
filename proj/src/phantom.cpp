#include "wave/phantom.hpp"

#include "wave/error.hpp"

#include <cmath>
#include <random>

namespace wave {

void PhantomSpec::validate() const {
  require(!ellipsoids.empty(), "phantom needs at least one ellipsoid");
  for (auto const &e : ellipsoids)
    require(e.semi[0] > 0 && e.semi[1] > 0 && e.semi[2] > 0, "ellipsoid semi-axes must be > 0");
}

PhantomSpec default_phantom_spec() {
  PhantomSpec s;
  s.ellipsoids = {
      {{0, 0, 0}, {75, 95, 80}, {1.0, 0.0}},
      {{0, 20, 0}, {30, 25, 50}, {-0.4, 0.0}},
      {{-20, -35, 5}, {15, 20, 40}, {0.5, 0.2}},
      {{28, -10, -5}, {10, 14, 30}, {0.3, -0.1}},
  };
  return s;
}

ComplexVolume make_phantom(Grid const &grid, PhantomSpec const &spec) {
  spec.validate();
  ComplexVolume v(grid);
  for (Index z = 0; z < grid.nz; ++z) {
    double const rz = grid.coord(Axis::Z, z);
    for (Index y = 0; y < grid.ny; ++y) {
      double const ry = grid.coord(Axis::Y, y);
      for (Index x = 0; x < grid.nx; ++x) {
        double const rx = grid.coord(Axis::X, x);
        double const r[3] = {rx, ry, rz};
        cplx val = 0;
        for (auto const &e : spec.ellipsoids) {
          double q = 0;
          for (int a = 0; a < 3; ++a) {
            double const t = (r[a] - e.center[a]) / e.semi[a];
            q += t * t;
          }
          if (q <= 1.0) val += e.amplitude;
        }
        double phi = spec.phase_const;
        for (int a = 0; a < 3; ++a) phi += spec.phase_linear[a] * r[a] + spec.phase_quadratic[a] * r[a] * r[a];
        v(x, y, z) = phi == 0.0 ? val : val * std::polar(1.0, phi);
      }
    }
  }
  return v;
}

std::vector<double> CoilMaps::rss() const {
  Index const n = grid.size();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (Index c = 0; c < ncoils; ++c)
    for (Index i = 0; i < n; ++i) out[std::size_t(i)] += std::norm(data[std::size_t(c * n + i)]);
  for (auto &v : out) v = std::sqrt(v);
  return out;
}

CoilMaps make_coil_maps(Grid const &grid, CoilSpec const &spec) {
  require(spec.ncoils >= 1, "ncoils must be >= 1");
  require(spec.lobe_width_mm > 0, "coil lobe width must be > 0");
  require(spec.z_rows >= 1, "coil z_rows must be >= 1");
  grid.validate();
  CoilMaps m{grid, spec.ncoils, CVec(std::size_t(spec.ncoils * grid.size()))};
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::uniform_real_distribution<double> phase0(-pi, pi);
  Index const n = grid.size();
  for (Index c = 0; c < spec.ncoils; ++c) {
    double const theta = 2.0 * pi * double(c) / double(spec.ncoils) + jitter(rng);
    double const p0 = phase0(rng);
    // Rows cycle from +z_offset to -z_offset; two rows alternate.
    double const cz = spec.ncoils == 1 || spec.z_rows == 1
                          ? 0.0
                          : spec.z_offset_mm * (1.0 - 2.0 * double(c % spec.z_rows) / double(spec.z_rows - 1));
    double const cx = spec.ring_radius_mm * std::cos(theta);
    double const cy = spec.ring_radius_mm * std::sin(theta);
    double const cn = std::sqrt(cx * cx + cy * cy + cz * cz);
    double const ux = cx / cn, uy = cy / cn, uz = cz / cn;
    double const w2 = 2.0 * spec.lobe_width_mm * spec.lobe_width_mm;
    cplx *out = m.data.data() + c * n;
    for (Index z = 0; z < grid.nz; ++z)
      for (Index y = 0; y < grid.ny; ++y)
        for (Index x = 0; x < grid.nx; ++x) {
          double const rx = grid.coord(Axis::X, x), ry = grid.coord(Axis::Y, y), rz = grid.coord(Axis::Z, z);
          double const d2 = (rx - cx) * (rx - cx) + (ry - cy) * (ry - cy) + (rz - cz) * (rz - cz);
          double const mag = std::exp(-d2 / w2);
          double const ph = p0 + spec.phase_slope * (rx * ux + ry * uy + rz * uz);
          out[grid.index(x, y, z)] = std::polar(mag, ph);
        }
  }
  return m;
}

CoilMaps uniform_coils(Grid const &grid, Index ncoils) {
  require(ncoils >= 1, "ncoils must be >= 1");
  return CoilMaps{grid, ncoils, CVec(std::size_t(ncoils * grid.size()), cplx(1.0, 0.0))};
}

void add_noise(std::span<cplx> data, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && std::isfinite(sigma), "noise sigma must be finite and >= 0");
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  for (auto &v : data) {
    double const re = nd(rng);
    double const im = nd(rng);
    v += cplx(re, im);
  }
}

std::vector<CVec> make_smooth_phases(Grid const &grid, Index count, double amplitude_rad, int max_cycles,
                                     std::uint64_t seed) {
  require(count >= 0 && max_cycles >= 0, "make_smooth_phases: bad arguments");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(-pi, pi);
  double const fx = grid.nx * grid.dx, fy = grid.ny * grid.dy, fz = grid.nz * grid.dz;
  std::vector<CVec> out;
  for (Index s = 0; s < count; ++s) {
    struct Term {
      int kx, ky;
      double a, ph;
    };
    std::vector<Term> terms;
    double norm = 0;
    for (int ky = -max_cycles; ky <= max_cycles; ++ky)
      for (int kx = -max_cycles; kx <= max_cycles; ++kx) {
        double const a = nd(rng);
        double const ph = ud(rng);
        terms.push_back({kx, ky, a, ph});
        norm += a * a;
      }
    double const slope_z = nd(rng) * 0.5 / fz;
    double const scale = norm > 0 ? amplitude_rad / std::sqrt(norm) : 0.0;
    CVec map(std::size_t(grid.size()));
    for (Index z = 0; z < grid.nz; ++z)
      for (Index y = 0; y < grid.ny; ++y)
        for (Index x = 0; x < grid.nx; ++x) {
          double const rx = grid.coord(Axis::X, x) / fx, ry = grid.coord(Axis::Y, y) / fy;
          double phi = slope_z * amplitude_rad * grid.coord(Axis::Z, z);
          for (auto const &t : terms) phi += scale * t.a * std::cos(2.0 * pi * (t.kx * rx + t.ky * ry) + t.ph);
          map[std::size_t(grid.index(x, y, z))] = std::polar(1.0, phi);
        }
    out.push_back(std::move(map));
  }
  return out;
}

std::vector<char> support_mask(ComplexVolume const &v, double threshold) {
  double mx = 0;
  for (auto const &x : v.data) mx = std::max(mx, std::abs(x));
  std::vector<char> m(v.data.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(v.data[i]) > threshold * mx ? 1 : 0;
  return m;
}

} // namespace wave
