#include "support.hpp"

#include "wave/calibration.hpp"
#include "wave/phantom.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>

using namespace wave;

namespace {

struct Setup {
  Grid g = test::make_grid(32, 32, 4, 220.0 / 32, 5.0);
  WaveformSpec wy = test::wave_y(12, 2.5, 0.8);
  WaveformSpec wz = test::wave_z(10, 2.5, 0.8);
  Imperfection imp;
  ComplexVolume img;
  CoilMaps coils;
  Setup() {
    imp.delay_ms = {0.004, 0.012};
    imp.scale = {1.0, 0.97};
    img = make_phantom(g, default_phantom_spec());
    CoilSpec cs;
    cs.ncoils = 8;
    coils = make_coil_maps(g, cs);
  }
  ReferenceScan ref(double sigma, double frac = 1.0) const {
    return simulate_reference(img, coils, wy, wz, imp, ReferenceSpec{frac, sigma, 11});
  }
};

double max_err(std::vector<double> const &a, std::vector<double> const &b, std::vector<Index> const &idx) {
  double m = 0;
  for (Index k : idx) m = std::max(m, std::abs(a[std::size_t(k)] - b[std::size_t(k)]));
  return m;
}

std::vector<Index> all_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[std::size_t(i)] = i;
  return v;
}

} // namespace

TEST_CASE("noiseless calibration recovers the played PSFs", "[calibration]") {
  Setup const s;
  auto const ref = s.ref(0.0);
  auto const truth = make_psf_set(s.wy, s.wz, s.g.nx, s.imp);
  auto const idx = all_indices(s.g.nx);
  for (int p = 0; p < 2; ++p) {
    auto const pol = static_cast<Polarity>(p);
    CHECK(max_err(estimate_psf_direct(ref, Axis::Y, pol).psi, truth.psi_y[std::size_t(p)], idx) < 1e-9);
    CHECK(max_err(estimate_psf_direct(ref, Axis::Z, pol).psi, truth.psi_z[std::size_t(p)], idx) < 1e-9);
  }
  auto const cal = calibrate(ref, s.wy, s.wz, 2);
  for (int p = 0; p < 2; ++p) {
    CHECK(max_err(cal.psfs.psi_y[std::size_t(p)], truth.psi_y[std::size_t(p)], idx) < 1e-6);
    CHECK(max_err(cal.psfs.psi_z[std::size_t(p)], truth.psi_z[std::size_t(p)], idx) < 1e-6);
  }
  CHECK_FALSE(cal.psfs.polarities_identical());
  for (auto const &row : cal.fits)
    for (auto const &fit : row) {
      REQUIRE_FALSE(fit.cost.empty());
      for (std::size_t i = 1; i < fit.cost.size(); ++i) CHECK(fit.cost[i] <= fit.cost[i - 1] * (1 + 1e-12));
    }
}

TEST_CASE("identical wave and reference scans give zero slope", "[calibration]") {
  Setup const s;
  auto ref = s.ref(0.0);
  ref.S_wy = ref.S_r;
  ref.S_wz = ref.S_r;
  for (Axis a : {Axis::Y, Axis::Z})
    for (double v : estimate_psf_direct(ref, a, Polarity::Negative).psi) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("estimates ignore a global image phase", "[calibration]") {
  Setup s;
  auto const before = calibrate(s.ref(0.0), s.wy, s.wz, 2).psfs;
  for (auto &v : s.img.data) v *= std::polar(1.0, 1.1);
  auto const after = calibrate(s.ref(0.0), s.wy, s.wz, 2).psfs;
  auto const idx = all_indices(s.g.nx);
  for (int p = 0; p < 2; ++p) {
    CHECK(max_err(before.psi_y[std::size_t(p)], after.psi_y[std::size_t(p)], idx) < 1e-8);
    CHECK(max_err(before.psi_z[std::size_t(p)], after.psi_z[std::size_t(p)], idx) < 1e-8);
  }
}

TEST_CASE("auto fit beats the direct estimate at high |kx| under noise", "[calibration]") {
  Setup const s;
  double mean = 0;
  for (auto const &v : s.img.data) mean += std::abs(v);
  mean /= double(s.img.data.size());
  auto const ref = s.ref(mean / 20.0);
  auto const truth = make_psf_set(s.wy, s.wz, s.g.nx, s.imp);
  auto const cal = calibrate(ref, s.wy, s.wz, 2);
  // Top quartile of |kx - nx/2|.
  std::vector<Index> outer;
  Index const nx = s.g.nx;
  for (Index k = 0; k < nx; ++k)
    if (std::abs(k - nx / 2) >= 3 * nx / 8) outer.push_back(k);
  for (int p = 0; p < 2; ++p) {
    auto const pol = static_cast<Polarity>(p);
    CHECK(max_err(cal.psfs.psi_y[std::size_t(p)], truth.psi_y[std::size_t(p)], outer) <
          max_err(cal.direct[0][std::size_t(p)].psi, truth.psi_y[std::size_t(p)], outer));
    CHECK(max_err(cal.psfs.psi_z[std::size_t(p)], truth.psi_z[std::size_t(p)], outer) <
          max_err(cal.direct[1][std::size_t(p)].psi, truth.psi_z[std::size_t(p)], outer));
    (void)pol;
  }
}

TEST_CASE("sparse-frequency model", "[calibration]") {
  SparseFreqCoeffs c;
  c.freqs = {1.0, 2.0};
  c.q = {cplx(0.3, -0.2), cplx(0.0, 0.1)};
  c.offset = 0.05;
  auto const p = c.params();
  REQUIRE(p.size() == 5);
  SparseFreqCoeffs d = c;
  d.set_params(std::vector<double>(5, 0.0));
  for (double v : d.evaluate(1.0, 16)) CHECK(v == 0.0);
  d.set_params(p);
  CHECK(d.evaluate(1.0, 16) == c.evaluate(1.0, 16));
  CHECK_THROWS(d.set_params({1.0}));
  auto const tau = sample_times(1.0, 16);
  auto const e = c.evaluate(1.0, 16);
  for (std::size_t k = 0; k < 16; ++k) {
    double const want = 0.05 + 0.3 * std::cos(2 * pi * tau[k]) + 0.2 * std::sin(2 * pi * tau[k]) -
                        0.1 * std::sin(4 * pi * tau[k]);
    CHECK(std::abs(e[k] - want) < 1e-12);
  }
  CoeffTable zero;
  for (auto &row : zero)
    for (auto &x : row) {
      x.freqs = {1.0};
      x.q = {cplx(0, 0)};
    }
  CHECK(build_dual_psfs(zero, 1.0, 12).identity());
  auto const h = harmonic_basis(test::wave_y(10, 2.5, 0.8), 3);
  REQUIRE(h.size() == 3);
  CHECK(h[2] == Catch::Approx(3 * 2.5 / 0.8));
}

TEST_CASE("slice-direction slopes beyond the sampling period are unwrapped", "[calibration]") {
  Setup s;
  s.g = test::make_grid(32, 32, 6, 220.0 / 32, 20.0);
  s.wz = test::wave_z(15, 1.0, 0.2175);
  s.wy = test::wave_y(30, 0.5, 0.2175);
  s.img = make_phantom(s.g, default_phantom_spec());
  CoilSpec cs;
  cs.ncoils = 8;
  s.coils = make_coil_maps(s.g, cs);
  auto const truth = make_psf_set(s.wy, s.wz, s.g.nx, s.imp);
  double span = 0;
  for (double v : truth.psi_z[0]) span = std::max(span, std::abs(v) * s.g.dz);
  REQUIRE(span > pi);
  auto const ref = s.ref(0.0);
  auto const idx = all_indices(s.g.nx);
  for (int p = 0; p < 2; ++p) {
    auto const d = estimate_psf_direct(ref, Axis::Z, static_cast<Polarity>(p));
    CHECK(d.period == Catch::Approx(2 * pi / s.g.dz));
    CHECK(max_err(d.psi, truth.psi_z[std::size_t(p)], idx) < 1e-9);
  }
  auto const cal = calibrate(ref, s.wy, s.wz, 2);
  for (int p = 0; p < 2; ++p) CHECK(max_err(cal.psfs.psi_z[std::size_t(p)], truth.psi_z[std::size_t(p)], idx) < 1e-6);
}
