#include "wave/forward.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"
#include "wave/linop.hpp"
#include "wave/parallel.hpp"
#include "wave/simd/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace wave {

// ---- SliderEncoding ---------------------------------------------------------

bool SliderEncoding::is_identity() const {
  if (n_rf != n_thin) return false;
  for (Index r = 0; r < n_rf; ++r)
    for (Index t = 0; t < n_thin; ++t)
      if (at(r, t) != cplx(r == t ? 1.0 : 0.0, 0.0)) return false;
  return true;
}

double SliderEncoding::condition() const {
  Eigen::MatrixXcd m(n_rf, n_thin);
  for (Index r = 0; r < n_rf; ++r)
    for (Index t = 0; t < n_thin; ++t) m(r, t) = at(r, t);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  auto const &s = svd.singularValues();
  double const smin = s(s.size() - 1);
  return smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

void SliderEncoding::validate() const {
  require(n_rf >= 1 && n_thin >= 1, "slider: n_rf and n_thin must be >= 1");
  require(Index(matrix.size()) == n_rf * n_thin, "slider: matrix size must be n_rf * n_thin");
}

SliderEncoding SliderEncoding::identity(Index n) {
  SliderEncoding s{n, n, CVec(std::size_t(n * n), cplx(0, 0))};
  for (Index i = 0; i < n; ++i) s.matrix[std::size_t(i * n + i)] = 1.0;
  return s;
}

SliderEncoding SliderEncoding::dft(Index n) {
  SliderEncoding s{n, n, CVec(std::size_t(n * n))};
  for (Index r = 0; r < n; ++r)
    for (Index t = 0; t < n; ++t)
      s.matrix[std::size_t(r * n + t)] = std::polar(1.0 / std::sqrt(double(n)), -2.0 * pi * double(r * t % n) / double(n));
  return s;
}

// ---- ShotDataSet ------------------------------------------------------------

Index ShotDataSet::size() const {
  Index n = 0;
  for (auto const &b : blocks) n += Index(b.data.size());
  return n;
}

CVec ShotDataSet::flatten() const {
  CVec out;
  out.reserve(std::size_t(size()));
  for (auto const &b : blocks) out.insert(out.end(), b.data.begin(), b.data.end());
  return out;
}

void ShotDataSet::assign(CVec const &flat) {
  require(Index(flat.size()) == size(), "ShotDataSet::assign: size mismatch");
  auto it = flat.begin();
  for (auto &b : blocks) {
    std::copy(it, it + Index(b.data.size()), b.data.begin());
    it += Index(b.data.size());
  }
}

bool ShotDataSet::all_finite() const {
  for (auto const &b : blocks)
    for (auto const &v : b.data)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

// ---- EncodingContext --------------------------------------------------------

std::vector<Index> EncodingContext::active_shots() const {
  if (!shots.empty()) return shots;
  std::vector<Index> all(std::size_t(pattern.n_shots));
  for (Index s = 0; s < pattern.n_shots; ++s) all[std::size_t(s)] = s;
  return all;
}

void EncodingContext::validate() const {
  grid.validate();
  slider.validate();
  require(coils != nullptr && coils->ncoils >= 1, "encoding: coil maps missing");
  require(coils->grid.nx == grid.nx && coils->grid.ny == grid.ny && coils->grid.nz == grid.nz,
          "encoding: coil maps do not match the image grid");
  require(psfs.nx() == grid.nx && Index(psfs.psi_y[1].size()) == grid.nx && Index(psfs.psi_z[0].size()) == grid.nx &&
              Index(psfs.psi_z[1].size()) == grid.nx,
          "encoding: PSF length does not match nx");
  require(grid.nz % slider.n_thin == 0, "encoding: nz must be a multiple of the slab thickness in thin slices");
  require(pattern.ny == grid.ny, "encoding: pattern ny does not match grid");
  require(pattern.nz == nslab(), "encoding: pattern nz must equal the number of slabs");
  for (Index s : active_shots()) require(s >= 0 && s < pattern.n_shots, "encoding: shot index out of range");
  if (!phases.empty()) {
    require(phases.n_shots == pattern.n_shots && phases.n_rf == slider.n_rf, "encoding: shot phase table shape mismatch");
    for (auto const &m : phases.maps) require(Index(m.size()) == grid.size(), "encoding: shot phase map size mismatch");
  }
}

EncodingContext EncodingContext::with_shots(std::vector<Index> s) const {
  EncodingContext c = *this;
  c.shots = std::move(s);
  return c;
}

Grid slab_grid(Grid const &thin, Index n_thin) {
  require(n_thin >= 1 && thin.nz % n_thin == 0, "slab_grid: nz must be a multiple of n_thin");
  Grid g = thin;
  g.nz = thin.nz / n_thin;
  g.dz = thin.dz * double(n_thin);
  double center0 = 0;
  for (Index t = 0; t < n_thin; ++t) center0 += thin.coord(Axis::Z, t);
  center0 /= double(n_thin);
  g.offset[2] = 0.0;
  g.offset[2] = center0 - g.coord(Axis::Z, 0);
  return g;
}

// ---- WaveEncoder ------------------------------------------------------------

WaveEncoder::WaveEncoder(EncodingContext ctx) : ctx_(std::move(ctx)) {
  ctx_.validate();
  Grid const &g = ctx_.grid;
  same_psf_ = ctx_.psfs.polarities_identical();
  for (int p = 0; p < 2; ++p) {
    if (p == 1 && same_psf_) {
      table_[1] = table_[0];
      continue;
    }
    CVec &t = table_[std::size_t(p)];
    t.resize(std::size_t(g.size()));
    auto const &py = ctx_.psfs.psi_y[std::size_t(p)];
    auto const &pz = ctx_.psfs.psi_z[std::size_t(p)];
    for (Index z = 0; z < g.nz; ++z) {
      double const rz = g.coord(Axis::Z, z);
      for (Index y = 0; y < g.ny; ++y) {
        double const ry = g.coord(Axis::Y, y);
        for (Index k = 0; k < g.nx; ++k)
          t[std::size_t(g.index(k, y, z))] = std::polar(1.0, -(py[std::size_t(k)] * ry + pz[std::size_t(k)] * rz));
      }
    }
  }
}

ShotDataSet WaveEncoder::zero_data() const {
  ShotDataSet d;
  d.nx = ctx_.grid.nx;
  d.ngroups = ctx_.pattern.ngroups();
  d.ncoils = ctx_.coils->ncoils;
  for (Index s : ctx_.active_shots()) {
    auto [pos, neg] = split_by_polarity(ctx_.pattern, s);
    for (Index r = 0; r < ctx_.slider.n_rf; ++r)
      for (int p = 0; p < 2; ++p) {
        DataBlock b;
        b.shot = s;
        b.rf = r;
        b.polarity = static_cast<Polarity>(p);
        b.ky = p == 0 ? pos : neg;
        b.data.assign(std::size_t(d.nx * Index(b.ky.size()) * d.ngroups * d.ncoils), cplx(0, 0));
        d.blocks.push_back(std::move(b));
      }
  }
  return d;
}

void WaveEncoder::check_data(ShotDataSet const &d) const {
  ShotDataSet const ref = zero_data();
  require(d.nx == ref.nx && d.ngroups == ref.ngroups && d.ncoils == ref.ncoils && d.blocks.size() == ref.blocks.size(),
          "data set does not match the encoding context");
  for (std::size_t i = 0; i < d.blocks.size(); ++i)
    require(d.blocks[i].shot == ref.blocks[i].shot && d.blocks[i].rf == ref.blocks[i].rf &&
                d.blocks[i].polarity == ref.blocks[i].polarity && d.blocks[i].ky == ref.blocks[i].ky &&
                d.blocks[i].data.size() == ref.blocks[i].data.size(),
            "data block does not match the encoding context");
}

namespace {

// Slab collapse of hybrid (kx, y, thin z) into (kx, y, slab) for one RF row.
void collapse(CVec const &h, CVec &slab, Grid const &g, SliderEncoding const &sl, Index rf) {
  Index const plane = g.nx * g.ny;
  Index const nslab = g.nz / sl.n_thin;
  slab.assign(std::size_t(plane * nslab), cplx(0, 0));
  for (Index b = 0; b < nslab; ++b)
    for (Index t = 0; t < sl.n_thin; ++t) {
      cplx const w = sl.at(rf, t);
      if (w == cplx(0, 0)) continue;
      simd::active().axpy(slab.data() + b * plane, w, h.data() + (b * sl.n_thin + t) * plane, plane);
    }
}

// Adjoint of collapse, accumulated into hyb after the PSF conjugate: hyb += conj(T) * expand(slab).
void expand_acc(CVec const &slab, CVec &tmp, CVec &hyb, CVec const &table, Grid const &g, SliderEncoding const &sl,
                Index rf) {
  Index const plane = g.nx * g.ny;
  Index const nslab = g.nz / sl.n_thin;
  for (Index b = 0; b < nslab; ++b)
    for (Index t = 0; t < sl.n_thin; ++t) {
      cplx const w = std::conj(sl.at(rf, t));
      Index const off = (b * sl.n_thin + t) * plane;
      std::fill(tmp.begin(), tmp.begin() + plane, cplx(0, 0));
      if (w != cplx(0, 0)) simd::active().axpy(tmp.data(), w, slab.data() + b * plane, plane);
      simd::active().mul_conj_acc(hyb.data() + off, table.data() + off, tmp.data(), plane);
    }
}

} // namespace

// w holds C_c * Phi * img after the x transform. Fills the coil's slice of each block.
void WaveEncoder::encode_coil(CVec &w, Index coil, Index rf, std::vector<DataBlock *> const &blocks) const {
  Grid const &g = ctx_.grid;
  SamplingPattern const &pat = ctx_.pattern;
  Index const nslab = ctx_.nslab();
  Index const ng = pat.ngroups();
  Index const nx = g.nx;
  bool const plain = ctx_.slider.n_thin == 1 && ctx_.slider.n_rf == 1 && ctx_.slider.at(0, 0) == cplx(1, 0);
  CVec h(w.size()), slab;
  for (int p = 0; p < 2; ++p) {
    DataBlock *blk = blocks[std::size_t(p)];
    bool const shared = same_psf_ && p == 1;
    if (blk->ky.empty()) continue;
    if (!shared || blocks[0]->ky.empty()) {
      simd::active().mul(h.data(), w.data(), table_[std::size_t(p)].data(), Index(w.size()));
      if (plain) slab = h;
      else collapse(h, slab, g, ctx_.slider, rf);
      centered_dft(slab, {nx, g.ny, nslab}, 1, Direction::Forward);
    }
    Index const nl = Index(blk->ky.size());
    for (Index i = 0; i < nl; ++i) {
      Index const ky = blk->ky[std::size_t(i)];
      for (Index grp = 0; grp < ng; ++grp) {
        cplx *out = blk->data.data() + nx * (i + nl * (grp + ng * coil));
        std::fill(out, out + nx, cplx(0, 0));
        for (Index l = 0; l < pat.R_sms; ++l) {
          Index const b = pat.slab_of(grp, l);
          simd::active().axpy(out, pat.caipi(l, ky), slab.data() + nx * (ky + g.ny * b), nx);
        }
      }
    }
  }
}

// Accumulates the hybrid-space adjoint of the coil's data into hyb (before the inverse x transform).
void WaveEncoder::adjoint_coil(CVec &hyb, Index coil, Index rf, std::vector<DataBlock const *> const &blocks) const {
  Grid const &g = ctx_.grid;
  SamplingPattern const &pat = ctx_.pattern;
  Index const nslab = ctx_.nslab();
  Index const ng = pat.ngroups();
  Index const nx = g.nx;
  Index const plane = nx * g.ny;
  bool const plain = ctx_.slider.n_thin == 1 && ctx_.slider.n_rf == 1 && ctx_.slider.at(0, 0) == cplx(1, 0);
  CVec slab, tmp(static_cast<std::size_t>(plane));
  auto scatter = [&](DataBlock const *blk) {
    Index const nl = Index(blk->ky.size());
    for (Index i = 0; i < nl; ++i) {
      Index const ky = blk->ky[std::size_t(i)];
      for (Index grp = 0; grp < ng; ++grp) {
        cplx const *in = blk->data.data() + nx * (i + nl * (grp + ng * coil));
        for (Index l = 0; l < pat.R_sms; ++l) {
          Index const b = pat.slab_of(grp, l);
          simd::active().axpy(slab.data() + nx * (ky + g.ny * b), std::conj(pat.caipi(l, ky)), in, nx);
        }
      }
    }
  };
  auto finish = [&](int p) {
    centered_dft(slab, {nx, g.ny, nslab}, 1, Direction::Inverse);
    if (plain) simd::active().mul_conj_acc(hyb.data(), table_[std::size_t(p)].data(), slab.data(), Index(hyb.size()));
    else expand_acc(slab, tmp, hyb, table_[std::size_t(p)], g, ctx_.slider, rf);
  };
  if (same_psf_) {
    if (blocks[0]->ky.empty() && blocks[1]->ky.empty()) return;
    slab.assign(std::size_t(plane * nslab), cplx(0, 0));
    scatter(blocks[0]);
    scatter(blocks[1]);
    finish(0);
    return;
  }
  for (int p = 0; p < 2; ++p) {
    if (blocks[std::size_t(p)]->ky.empty()) continue;
    slab.assign(std::size_t(plane * nslab), cplx(0, 0));
    scatter(blocks[std::size_t(p)]);
    finish(p);
  }
}

ShotDataSet WaveEncoder::encode(ComplexVolume const &img) const {
  Grid const &g = ctx_.grid;
  require(img.grid.nx == g.nx && img.grid.ny == g.ny && img.grid.nz == g.nz, "encode: image grid mismatch");
  ShotDataSet d = zero_data();
  Index const n = g.size();
  Index const nc = ctx_.coils->ncoils;
  std::size_t bi = 0;
  for (Index s : ctx_.active_shots())
    for (Index r = 0; r < ctx_.slider.n_rf; ++r, bi += 2) {
      CVec u = img.data;
      if (!ctx_.phases.empty()) simd::active().mul(u.data(), u.data(), ctx_.phases.get(s, r).data(), n);
      std::vector<DataBlock *> blks{&d.blocks[bi], &d.blocks[bi + 1]};
      parallel_for(nc, [&](Index c) {
        CVec w(static_cast<std::size_t>(n));
        simd::active().mul(w.data(), u.data(), ctx_.coils->coil(c).data(), n);
        centered_dft(w, {g.nx, g.ny, g.nz}, 0, Direction::Forward);
        encode_coil(w, c, r, blks);
      });
    }
  return d;
}

ComplexVolume WaveEncoder::adjoint(ShotDataSet const &data) const {
  check_data(data);
  Grid const &g = ctx_.grid;
  Index const n = g.size();
  Index const nc = ctx_.coils->ncoils;
  ComplexVolume out(g);
  std::vector<CVec> per_coil(static_cast<std::size_t>(nc), CVec(static_cast<std::size_t>(n)));
  std::size_t bi = 0;
  for (Index s : ctx_.active_shots())
    for (Index r = 0; r < ctx_.slider.n_rf; ++r, bi += 2) {
      std::vector<DataBlock const *> blks{&data.blocks[bi], &data.blocks[bi + 1]};
      parallel_for(nc, [&](Index c) {
        CVec &hyb = per_coil[std::size_t(c)];
        std::fill(hyb.begin(), hyb.end(), cplx(0, 0));
        adjoint_coil(hyb, c, r, blks);
        centered_dft(hyb, {g.nx, g.ny, g.nz}, 0, Direction::Inverse);
        simd::active().mul_conj(hyb.data(), ctx_.coils->coil(c).data(), hyb.data(), n);
      });
      CVec acc(static_cast<std::size_t>(n), cplx(0, 0));
      for (Index c = 0; c < nc; ++c) simd::active().axpy(acc.data(), 1.0, per_coil[std::size_t(c)].data(), n);
      if (!ctx_.phases.empty()) simd::active().mul_conj_acc(out.data.data(), ctx_.phases.get(s, r).data(), acc.data(), n);
      else simd::active().axpy(out.data.data(), 1.0, acc.data(), n);
    }
  return out;
}

ComplexVolume WaveEncoder::normal(ComplexVolume const &x) const { return adjoint(encode(x)); }

ShotDataSet encode(ComplexVolume const &img, EncodingContext const &ctx) { return WaveEncoder(ctx).encode(img); }

ComplexVolume adjoint(ShotDataSet const &data, EncodingContext const &ctx) { return WaveEncoder(ctx).adjoint(data); }

PowerIteration lipschitz_estimate(WaveEncoder const &enc, int iters, std::uint64_t seed) {
  require(iters >= 10, "lipschitz_estimate: need at least 10 iterations");
  Grid const &g = enc.context().grid;
  ComplexVolume v(g, random_cvec(g.size(), seed));
  double nv = std::sqrt(simd::norm2(v.data));
  simd::scale(v.data, 1.0 / nv);
  PowerIteration out{0.0, {}};
  for (int k = 0; k < iters; ++k) {
    ComplexVolume mv = enc.normal(v);
    double const nm = std::sqrt(simd::norm2(mv.data));
    if (!std::isfinite(nm)) throw Error(ErrorKind::Divergence, "lipschitz_estimate: non-finite iterate", out.history);
    out.history.push_back(nm);
    out.L = nm;
    if (nm == 0.0) break;
    simd::scale(mv.data, 1.0 / nm);
    v = std::move(mv);
  }
  return out;
}

} // namespace wave
