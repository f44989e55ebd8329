#include "support.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"
#include "wave/phantom.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

using namespace wave;

namespace {

// Brute-force model: every sample is an explicit sum over voxels.
ShotDataSet brute_force(ComplexVolume const &img, EncodingContext const &ctx, ShotDataSet shape) {
  Grid const &g = ctx.grid;
  auto const &pat = ctx.pattern;
  auto const F = [](Index k, Index j, Index n) {
    double const c = double(n / 2);
    return std::polar(1.0 / std::sqrt(double(n)), -2.0 * pi * (double(j) - c) * (double(k) - c) / double(n));
  };
  for (auto &b : shape.blocks) {
    Index const nl = Index(b.ky.size()), p = Index(b.polarity);
    for (Index c = 0; c < shape.ncoils; ++c)
      for (Index grp = 0; grp < shape.ngroups; ++grp)
        for (Index i = 0; i < nl; ++i)
          for (Index kx = 0; kx < g.nx; ++kx) {
            Index const ky = b.ky[std::size_t(i)];
            cplx acc = 0;
            for (Index z = 0; z < g.nz; ++z) {
              Index const slab = z / ctx.slider.n_thin, t = z % ctx.slider.n_thin;
              if (pat.group_of(slab) != grp) continue;
              cplx const w = ctx.slider.at(b.rf, t) * pat.caipi(pat.level_of(slab), ky);
              for (Index y = 0; y < g.ny; ++y)
                for (Index x = 0; x < g.nx; ++x) {
                  Index const v = g.index(x, y, z);
                  double const ph = ctx.psfs.psi_y[std::size_t(p)][std::size_t(kx)] * g.coord(Axis::Y, y) +
                                    ctx.psfs.psi_z[std::size_t(p)][std::size_t(kx)] * g.coord(Axis::Z, z);
                  cplx val = img.data[std::size_t(v)] * ctx.coils->coil(c)[std::size_t(v)] * std::polar(1.0, -ph);
                  if (!ctx.phases.empty()) val *= ctx.phases.get(b.shot, b.rf)[std::size_t(v)];
                  acc += w * val * F(kx, x, g.nx) * F(ky, y, g.ny);
                }
            }
            b.data[std::size_t(kx + g.nx * (i + nl * (grp + shape.ngroups * c)))] = acc;
          }
  }
  return shape;
}

// Small wave + SMS + gSlider + multi-shot context.
EncodingContext full_context(Index nx, Index ny, Index nslab, Index n_thin, Index ncoils, Index R_in, Index R_sms,
                             Index n_shots) {
  Grid const g = test::make_grid(nx, ny, nslab * n_thin, 4.0, 2.0);
  CoilSpec cs;
  cs.ncoils = ncoils;
  cs.ring_radius_mm = 40;
  cs.lobe_width_mm = 25;
  cs.z_offset_mm = 8;
  auto coils = std::make_shared<CoilMaps const>(make_coil_maps(g, cs));
  Imperfection imp;
  imp.delay_ms = {0.0, 0.02};
  auto psfs = make_psf_set(test::wave_y(8, 3, 2.0), test::wave_z(8, 3, 2.0), nx, imp);
  auto ctx = test::basic_context(g, coils, psfs, make_pattern(ny, nslab, R_in, R_sms, n_shots, 1.0));
  ctx.slider = SliderEncoding::dft(n_thin);
  auto maps = make_smooth_phases(g, n_shots * n_thin, 1.0, 2, 3);
  ctx.phases = ShotPhase{n_shots, n_thin, maps};
  return ctx;
}

double dot_test(WaveEncoder const &enc) {
  auto const &g = enc.context().grid;
  ShotDataSet shape = enc.zero_data();
  LinearMap fwd = [&](CVec const &x) { return enc.encode(ComplexVolume(g, x)).flatten(); };
  LinearMap adj = [&](CVec const &y) {
    ShotDataSet d = shape;
    d.assign(y);
    return enc.adjoint(d).data;
  };
  return adjoint_dot_test(fwd, adj, g.size(), shape.size(), 17, 4);
}

} // namespace

TEST_CASE("encoder matches the brute-force sum", "[forward]") {
  auto const ctx = full_context(6, 8, 4, 2, 2, 2, 2, 2);
  WaveEncoder const enc(ctx);
  auto const img = test::random_volume(ctx.grid, 4);
  auto const got = enc.encode(img).flatten();
  auto const want = brute_force(img, ctx, enc.zero_data()).flatten();
  CHECK(test::rel_diff(got, want) < 1e-12);
}

TEST_CASE("adjoint passes the dot test", "[forward]") {
  SECTION("wave + SMS + gSlider, 8 coils") {
    auto const ctx = full_context(32, 32, 2, 5, 8, 2, 2, 2);
    CHECK(dot_test(WaveEncoder(ctx)) < 1e-8);
  }
  SECTION("partial Fourier, odd sizes, distinct polarities") {
    auto ctx = full_context(15, 24, 3, 1, 3, 3, 3, 1);
    ctx.pattern = make_pattern(24, 3, 3, 3, 1, 0.75);
    ctx.phases = {};
    ctx.slider = SliderEncoding::identity(1);
    CHECK_FALSE(ctx.psfs.polarities_identical());
    CHECK(dot_test(WaveEncoder(ctx)) < 1e-8);
  }
  SECTION("rectangular slab encoding") {
    auto ctx = full_context(8, 8, 2, 3, 2, 1, 1, 1);
    ctx.slider = SliderEncoding{2, 3, {1.0, 0.5, cplx(0, 1), -1.0, 2.0, 0.25}};
    ctx.phases = {};
    CHECK(dot_test(WaveEncoder(ctx)) < 1e-8);
  }
}

TEST_CASE("no wave, R=1, one uniform coil is the 2D DFT", "[forward]") {
  Grid const g = test::make_grid(10, 12, 3);
  auto ctx = test::basic_context(g, std::make_shared<CoilMaps const>(uniform_coils(g)), PsfSet::none(g.nx),
                                 make_pattern(g.ny, g.nz, 1, 1, 1, 1.0));
  auto const img = test::random_volume(g, 2);
  auto const d = encode(img, ctx);
  CVec k = img.data;
  centered_dft_naive(k, {g.nx, g.ny, g.nz}, 0, Direction::Forward);
  centered_dft_naive(k, {g.nx, g.ny, g.nz}, 1, Direction::Forward);
  for (auto const &b : d.blocks)
    for (std::size_t i = 0; i < b.ky.size(); ++i)
      for (Index z = 0; z < g.nz; ++z)
        for (Index kx = 0; kx < g.nx; ++kx)
          CHECK(std::abs(b.data[std::size_t(kx + g.nx * (Index(i) + Index(b.ky.size()) * z))] -
                         k[std::size_t(g.index(kx, b.ky[i], z))]) < 1e-12);
}

TEST_CASE("encoder is linear and maps zero to zero", "[forward]") {
  auto const ctx = full_context(8, 12, 2, 2, 3, 2, 2, 2);
  WaveEncoder const enc(ctx);
  auto const x = test::random_volume(ctx.grid, 5), y = test::random_volume(ctx.grid, 6);
  cplx const a(0.3, -1.2), b(2.0, 0.5);
  ComplexVolume mix(ctx.grid);
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = a * x.data[i] + b * y.data[i];
  auto const ex = enc.encode(x).flatten(), ey = enc.encode(y).flatten();
  CVec want(ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) want[i] = a * ex[i] + b * ey[i];
  CHECK(test::rel_diff(enc.encode(mix).flatten(), want) < 1e-12);
  for (auto const &v : enc.encode(ComplexVolume(ctx.grid)).flatten()) CHECK(v == cplx(0, 0));
  for (auto const &v : enc.adjoint(enc.zero_data()).data) CHECK(v == cplx(0, 0));
}

TEST_CASE("impulse acquires the wave phase in hybrid space", "[forward]") {
  Grid const g = test::make_grid(16, 8, 1, 2.0, 4.0);
  auto const psfs = make_psf_set(test::wave_y(10, 2.5, 1.5), test::wave_z(0, 1, 1.5), g.nx);
  auto ctx = test::basic_context(g, std::make_shared<CoilMaps const>(uniform_coils(g)), psfs,
                                 make_pattern(g.ny, 1, 1, 1, 1, 1.0));
  Index const x0 = 9, y0 = 2;
  ComplexVolume img(g);
  img(x0, y0, 0) = 1.0;
  auto d = encode(img, ctx);
  // Undo the y transform line by line; what remains is F_x(kx, x0) exp(-i psi_y(kx) y0).
  CVec hyb(std::size_t(g.nx * g.ny));
  for (auto const &b : d.blocks)
    for (std::size_t i = 0; i < b.ky.size(); ++i)
      for (Index kx = 0; kx < g.nx; ++kx) hyb[std::size_t(kx + g.nx * b.ky[i])] = b.data[i * std::size_t(g.nx) + std::size_t(kx)];
  centered_dft_naive(hyb, {g.nx, g.ny, 1}, 1, Direction::Inverse);
  double const ry = g.coord(Axis::Y, y0);
  for (Index kx = 0; kx < g.nx; ++kx) {
    double const c = double(g.nx / 2);
    cplx const want = std::polar(1.0 / std::sqrt(double(g.nx)),
                                 -2.0 * pi * (double(x0) - c) * (double(kx) - c) / double(g.nx) -
                                     psfs.psi_y[0][std::size_t(kx)] * ry);
    CHECK(std::abs(hyb[std::size_t(kx + g.nx * y0)] - want) < 1e-12);
  }
}

TEST_CASE("Lipschitz estimate", "[forward]") {
  SECTION("unitary encoding gives 1; doubling the coils gives 4") {
    Grid const g = test::make_grid(8, 8, 2);
    auto ctx = test::basic_context(g, std::make_shared<CoilMaps const>(uniform_coils(g)), PsfSet::none(g.nx),
                                   make_pattern(g.ny, g.nz, 1, 1, 1, 1.0));
    CHECK(lipschitz_estimate(WaveEncoder(ctx), 20, 1).L == Catch::Approx(1.0).epsilon(1e-10));
    auto twice = uniform_coils(g);
    for (auto &v : twice.data) v *= 2.0;
    ctx.coils = std::make_shared<CoilMaps const>(twice);
    CHECK(lipschitz_estimate(WaveEncoder(ctx), 20, 1).L == Catch::Approx(4.0).epsilon(1e-10));
  }
  SECTION("matches the dense spectral norm") {
    auto ctx = full_context(8, 8, 2, 1, 3, 2, 2, 1);
    ctx.phases = {};
    ctx.slider = SliderEncoding::identity(1);
    WaveEncoder const enc(ctx);
    Index const n = ctx.grid.size();
    Eigen::MatrixXcd N(n, n);
    for (Index j = 0; j < n; ++j) {
      ComplexVolume e(ctx.grid);
      e.data[std::size_t(j)] = 1.0;
      auto const col = enc.normal(e);
      for (Index i = 0; i < n; ++i) N(i, j) = col.data[std::size_t(i)];
    }
    CHECK((N - N.adjoint()).norm() < 1e-10 * N.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(N);
    double const lmax = es.eigenvalues().maxCoeff();
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    auto const est = lipschitz_estimate(enc, 300, 3);
    CHECK(est.L <= lmax * (1 + 1e-9));
    CHECK(est.L == Catch::Approx(lmax).epsilon(1e-3));
  }
}

TEST_CASE("mismatched data and contexts are rejected", "[forward]") {
  auto const ctx = full_context(8, 8, 2, 1, 2, 2, 1, 1);
  WaveEncoder const enc(ctx);
  auto d = enc.zero_data();
  d.blocks.pop_back();
  CHECK_THROWS_AS(enc.adjoint(d), Error);
  auto bad = ctx;
  bad.psfs = PsfSet::none(7);
  CHECK_THROWS_AS(WaveEncoder(bad), Error);
  CHECK_THROWS_AS(enc.encode(ComplexVolume(test::make_grid(8, 8, 1))), Error);
}
