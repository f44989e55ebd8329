#include "wave/recon.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"
#include "wave/simd/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace wave {

namespace {

double data_cost(WaveEncoder const &enc, ComplexVolume const &x, ShotDataSet const &d) {
  ShotDataSet ax = enc.encode(x);
  double c = 0;
  for (std::size_t b = 0; b < ax.blocks.size(); ++b) {
    simd::axpy(ax.blocks[b].data, -1.0, d.blocks[b].data);
    c += simd::norm2(ax.blocks[b].data);
  }
  return c;
}

double data_norm2(ShotDataSet const &d) {
  double c = 0;
  for (auto const &b : d.blocks) c += simd::norm2(b.data);
  return c;
}

VolumeSolve run_cg(WaveEncoder const &enc, ShotDataSet const &data, SolverOptions const &opt, ComplexVolume const *init) {
  Grid const &g = enc.context().grid;
  ComplexVolume const rhs = enc.adjoint(data);
  auto normal = [&](CVec const &v) { return enc.normal(ComplexVolume(g, v)).data; };
  CVec x0;
  double cost0 = data_norm2(data);
  if (init) {
    require(init->grid.size() == g.size(), "CG init grid mismatch");
    x0 = init->data;
    cost0 = data_cost(enc, *init, data);
  }
  CgResult r = conjugate_gradient(normal, rhs.data, std::move(x0), cost0, opt.tol, opt.max_iters);
  VolumeSolve out{ComplexVolume(g, std::move(r.x)), std::move(r.residual), std::move(r.cost), r.iterations, r.converged};
  if (!out.image.all_finite()) throw Error(ErrorKind::Divergence, "CG produced a non-finite image", out.residual);
  return out;
}

// 2D centered DFT over (x, y) of one slice.
void slice_dft(CVec &plane, Index nx, Index ny, Direction dir) {
  centered_dft(plane, {nx, ny, 1}, 0, dir);
  centered_dft(plane, {nx, ny, 1}, 1, dir);
}

} // namespace

VolumeSolve sense_cg(ShotDataSet const &data, EncodingContext const &ctx, SolverOptions const &opt,
                     ComplexVolume const *init) {
  WaveEncoder const enc(ctx);
  return run_cg(enc, data, opt, init);
}

ComplexVolume adjoint_combine(ShotDataSet const &data, EncodingContext const &ctx) {
  WaveEncoder const enc(ctx);
  ComplexVolume v = enc.adjoint(data);
  CVec const u = enc.encode(v).flatten();
  CVec const y = data.flatten();
  cplx num = 0;
  double den = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += std::conj(u[i]) * y[i];
    den += std::norm(u[i]);
  }
  if (den > 0)
    for (auto &x : v.data) x *= num / den;
  return v;
}

ShotDataSet select_unit(ShotDataSet const &data, Index shot, Index rf) {
  ShotDataSet out;
  out.nx = data.nx;
  out.ngroups = data.ngroups;
  out.ncoils = data.ncoils;
  out.sigma = data.sigma;
  for (auto const &b : data.blocks)
    if (b.shot == shot && b.rf == rf) {
      out.blocks.push_back(b);
      out.blocks.back().rf = 0;
    }
  require(out.blocks.size() == 2, "select_unit: (shot, rf) not present in data");
  return out;
}

MultishotResult multishot_fista(ShotDataSet const &data, EncodingContext const &ctx, LowRankConfig const &cfg,
                                std::uint64_t seed) {
  cfg.validate();
  require(ctx.slider.n_rf == 1 && ctx.slider.n_thin == 1 && ctx.phases.empty(),
          "multishot_fista: context must have an identity slider and no phases");
  Grid const &g = ctx.grid;
  Index n_rf = 0;
  for (auto const &b : data.blocks) n_rf = std::max(n_rf, b.rf + 1);
  auto const shots = ctx.active_shots();
  Index const ns = Index(shots.size());
  require(ns >= 2, "multishot_fista: need at least 2 shots");

  MultishotResult out;
  out.n_shots = ns;
  out.n_rf = n_rf;
  std::vector<WaveEncoder> enc;
  for (Index s : shots) enc.emplace_back(ctx.with_shots({s}));
  std::vector<ShotDataSet> unit_data;
  for (Index si = 0; si < ns; ++si)
    for (Index r = 0; r < n_rf; ++r) unit_data.push_back(select_unit(data, shots[std::size_t(si)], r));
  Index const nu = ns * n_rf;
  auto enc_of = [&](Index u) -> WaveEncoder const & { return enc[std::size_t(u / n_rf)]; };

  for (Index si = 0; si < ns; ++si)
    out.lipschitz = std::max(out.lipschitz, lipschitz_estimate(enc[std::size_t(si)], 20, seed + std::uint64_t(si)).L);
  require(out.lipschitz > 0, "multishot_fista: zero operator");
  // Power iteration approaches L from below; a small margin keeps 1/L a valid step.
  double const step = 1.0 / (1.01 * out.lipschitz);

  // Warm start: a few SENSE-CG iterations per unit.
  std::vector<ComplexVolume> x(static_cast<std::size_t>(nu), ComplexVolume(g));
  if (cfg.cg_inner_iters > 0)
    for (Index u = 0; u < nu; ++u)
      x[std::size_t(u)] = run_cg(enc_of(u), unit_data[std::size_t(u)], {1e-12, cfg.cg_inner_iters}, nullptr).image;

  std::vector<ComplexVolume> z = x;
  double t = 1.0;
  Index const plane = g.nx * g.ny;
  for (int it = 0; it < cfg.fista_iters; ++it) {
    std::vector<ComplexVolume> xn(static_cast<std::size_t>(nu));
    for (Index u = 0; u < nu; ++u) {
      ShotDataSet res = enc_of(u).encode(z[std::size_t(u)]);
      for (std::size_t b = 0; b < res.blocks.size(); ++b)
        simd::axpy(res.blocks[b].data, -1.0, unit_data[std::size_t(u)].blocks[b].data);
      ComplexVolume grad = enc_of(u).adjoint(res);
      xn[std::size_t(u)] = z[std::size_t(u)];
      simd::axpy(xn[std::size_t(u)].data, -step, grad.data);
    }
    // Proximal step: rank projection of the per-slice shot k-spaces for each rf.
    for (Index r = 0; r < n_rf; ++r)
      for (Index sl = 0; sl < g.nz; ++sl) {
        std::vector<CVec> ks;
        for (Index si = 0; si < ns; ++si) {
          auto const &v = xn[std::size_t(si * n_rf + r)].data;
          CVec p(v.begin() + sl * plane, v.begin() + (sl + 1) * plane);
          slice_dft(p, g.nx, g.ny, Direction::Forward);
          ks.push_back(std::move(p));
        }
        hankel_project(ks, g.nx, g.ny, cfg);
        for (Index si = 0; si < ns; ++si) {
          CVec &p = ks[std::size_t(si)];
          slice_dft(p, g.nx, g.ny, Direction::Inverse);
          std::copy(p.begin(), p.end(), xn[std::size_t(si * n_rf + r)].data.begin() + sl * plane);
        }
      }
    double const tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double const mom = (t - 1.0) / tn;
    double cost = 0;
    for (Index u = 0; u < nu; ++u) {
      cost += data_cost(enc_of(u), xn[std::size_t(u)], unit_data[std::size_t(u)]);
      z[std::size_t(u)] = xn[std::size_t(u)];
      CVec diff = xn[std::size_t(u)].data;
      simd::axpy(diff, -1.0, x[std::size_t(u)].data);
      simd::axpy(z[std::size_t(u)].data, mom, diff);
    }
    if (!std::isfinite(cost)) throw Error(ErrorKind::Divergence, "multishot_fista: non-finite cost", out.cost);
    out.cost.push_back(cost);
    x = std::move(xn);
    t = tn;
  }
  out.images = std::move(x);
  return out;
}

ShotPhase estimate_shot_phase(std::vector<ComplexVolume> const &images, Index n_shots, Index n_rf,
                              double lowpass_fraction) {
  require(Index(images.size()) == n_shots * n_rf, "estimate_shot_phase: image count mismatch");
  require(lowpass_fraction > 0 && lowpass_fraction <= 1, "lowpass fraction must be in (0, 1]");
  ShotPhase ph{n_shots, n_rf, {}};
  for (auto const &img : images) {
    Grid const &g = img.grid;
    auto window = [&](Index n) {
      std::vector<double> w(static_cast<std::size_t>(n), 0.0);
      double const half = std::max(0.5, lowpass_fraction * double(n) / 2.0);
      for (Index k = 0; k < n; ++k) {
        double const u = double(k - n / 2) / half;
        if (std::abs(u) <= 1.0) w[std::size_t(k)] = 0.54 + 0.46 * std::cos(pi * u);
      }
      return w;
    };
    auto const wx = window(g.nx), wy = window(g.ny);
    Index const plane = g.nx * g.ny;
    CVec map(img.data.size());
    for (Index sl = 0; sl < g.nz; ++sl) {
      CVec p(img.data.begin() + sl * plane, img.data.begin() + (sl + 1) * plane);
      slice_dft(p, g.nx, g.ny, Direction::Forward);
      for (Index y = 0; y < g.ny; ++y)
        for (Index x = 0; x < g.nx; ++x) p[std::size_t(x + g.nx * y)] *= wx[std::size_t(x)] * wy[std::size_t(y)];
      slice_dft(p, g.nx, g.ny, Direction::Inverse);
      for (Index i = 0; i < plane; ++i) {
        double const m = std::abs(p[std::size_t(i)]);
        map[std::size_t(sl * plane + i)] = m > 0 ? p[std::size_t(i)] / m : cplx(1.0, 0.0);
      }
    }
    ph.maps.push_back(std::move(map));
  }
  return ph;
}

ShotPhase phase_to_thin(ShotPhase const &slab_phase, Grid const &slab, Grid const &thin) {
  require(slab.nx == thin.nx && slab.ny == thin.ny && thin.nz % slab.nz == 0, "phase_to_thin: grid mismatch");
  Index const nt = thin.nz / slab.nz;
  Index const plane = thin.nx * thin.ny;
  ShotPhase out{slab_phase.n_shots, slab_phase.n_rf, {}};
  for (auto const &m : slab_phase.maps) {
    CVec t(std::size_t(thin.size()));
    for (Index z = 0; z < thin.nz; ++z) std::copy_n(m.begin() + (z / nt) * plane, plane, t.begin() + z * plane);
    out.maps.push_back(std::move(t));
  }
  return out;
}

ComplexVolume gslider_init(std::vector<ComplexVolume> const &interim, ShotPhase const &phases,
                           SliderEncoding const &slider, Grid const &thin) {
  slider.validate();
  Index const ns = phases.n_shots, nr = phases.n_rf;
  require(nr == slider.n_rf, "gslider_init: rf count mismatch");
  require(Index(interim.size()) == ns * nr && Index(phases.maps.size()) == ns * nr, "gslider_init: image count mismatch");
  Grid const &sg = interim.front().grid;
  require(sg.nz * slider.n_thin == thin.nz && sg.nx == thin.nx && sg.ny == thin.ny, "gslider_init: grid mismatch");

  Eigen::MatrixXcd G(slider.n_rf, slider.n_thin);
  for (Index r = 0; r < slider.n_rf; ++r)
    for (Index t = 0; t < slider.n_thin; ++t) G(r, t) = slider.at(r, t);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto const &sv = svd.singularValues();
  if (slider.n_rf < slider.n_thin || sv(sv.size() - 1) <= 1e-12 * sv(0))
    fail("gslider_init: slab encoding matrix is singular");
  Eigen::MatrixXcd const Ginv = svd.solve(Eigen::MatrixXcd::Identity(slider.n_rf, slider.n_rf));

  Index const n = sg.size();
  std::vector<CVec> avg(static_cast<std::size_t>(nr), CVec(static_cast<std::size_t>(n), cplx(0, 0)));
  for (Index s = 0; s < ns; ++s)
    for (Index r = 0; r < nr; ++r)
      simd::mul_conj_acc(avg[std::size_t(r)], phases.get(s, r), interim[std::size_t(s * nr + r)].data);
  for (auto &a : avg) simd::scale(a, 1.0 / double(ns));

  ComplexVolume out(thin);
  Index const plane = thin.nx * thin.ny;
  for (Index b = 0; b < sg.nz; ++b)
    for (Index i = 0; i < plane; ++i) {
      Eigen::VectorXcd y(nr);
      for (Index r = 0; r < nr; ++r) y(r) = avg[std::size_t(r)][std::size_t(b * plane + i)];
      Eigen::VectorXcd const x = Ginv * y;
      for (Index t = 0; t < slider.n_thin; ++t) out.data[std::size_t((b * slider.n_thin + t) * plane + i)] = x(t);
    }
  return out;
}

VolumeSolve gslider_joint_cg(ShotDataSet const &data, EncodingContext const &ctx, SolverOptions const &opt,
                             ComplexVolume const &init) {
  WaveEncoder const enc(ctx);
  return run_cg(enc, data, opt, &init);
}

} // namespace wave

namespace wave {

struct DenseSense::Factor {
  Eigen::LLT<Eigen::MatrixXcd> llt;
};

DenseSense::DenseSense(EncodingContext ctx) : enc_(std::move(ctx)) {
  auto const &c = enc_.context();
  Grid const &g = c.grid;
  Index const plane = g.nx * g.ny;
  Index const ng = c.pattern.ngroups();
  voxels_.resize(std::size_t(ng));
  for (Index b = 0; b < c.nslab(); ++b)
    for (Index t = 0; t < c.slider.n_thin; ++t)
      for (Index i = 0; i < plane; ++i)
        voxels_[std::size_t(c.pattern.group_of(b))].push_back((b * c.slider.n_thin + t) * plane + i);
  for (auto &v : voxels_) std::sort(v.begin(), v.end());
  group_size_ = Index(voxels_.front().size());

  // One normal-operator pass probes the k-th unknown of every group at once.
  std::vector<Eigen::MatrixXcd> normal(std::size_t(ng), Eigen::MatrixXcd(group_size_, group_size_));
  ComplexVolume e(g);
  for (Index k = 0; k < group_size_; ++k) {
    std::fill(e.data.begin(), e.data.end(), cplx(0, 0));
    for (auto const &v : voxels_) e.data[std::size_t(v[std::size_t(k)])] = 1.0;
    ComplexVolume const col = enc_.normal(e);
    for (Index gi = 0; gi < ng; ++gi) {
      auto const &v = voxels_[std::size_t(gi)];
      for (Index r = 0; r < group_size_; ++r) normal[std::size_t(gi)](r, k) = col.data[std::size_t(v[std::size_t(r)])];
    }
  }
  for (auto &m : normal) {
    auto f = std::make_shared<Factor>();
    f->llt.compute(m);
    if (f->llt.info() != Eigen::Success) fail("DenseSense: normal matrix is not positive definite");
    m.resize(0, 0);
    factors_.push_back(std::move(f));
  }
}

ComplexVolume DenseSense::solve(ShotDataSet const &data) const {
  ComplexVolume const rhs = enc_.adjoint(data);
  ComplexVolume out(rhs.grid);
  for (std::size_t gi = 0; gi < voxels_.size(); ++gi) {
    auto const &v = voxels_[gi];
    Eigen::VectorXcd b(group_size_);
    for (Index r = 0; r < group_size_; ++r) b(r) = rhs.data[std::size_t(v[std::size_t(r)])];
    Eigen::VectorXcd const x = factors_[gi]->llt.solve(b);
    for (Index r = 0; r < group_size_; ++r) out.data[std::size_t(v[std::size_t(r)])] = x(r);
  }
  return out;
}

} // namespace wave
