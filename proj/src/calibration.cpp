#include "wave/calibration.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace wave {

namespace {

// Keeps the central n_ref ky lines of a full (kx, ky, z, coil) array.
CVec central_lines(CVec const &full, Index nx, Index ny, Index n_ref, Index rest) {
  Index const first = ny / 2 - n_ref / 2;
  CVec out(std::size_t(nx * n_ref * rest));
  for (Index r = 0; r < rest; ++r)
    for (Index j = 0; j < n_ref; ++j)
      std::copy_n(full.begin() + nx * (first + j + ny * r), nx, out.begin() + nx * (j + n_ref * r));
  return out;
}

CVec acquire(ComplexVolume const &img, CoilMaps const &coils, PsfSet const &psfs, Polarity pol, Index n_ref) {
  Grid const &g = img.grid;
  EncodingContext ctx;
  ctx.grid = g;
  ctx.coils = std::make_shared<CoilMaps const>(coils);
  ctx.psfs = psfs;
  ctx.pattern = full_pattern(g.ny, g.nz, pol);
  ctx.slider = SliderEncoding::identity(1);
  ShotDataSet d = WaveEncoder(ctx).encode(img);
  CVec const &full = d.blocks[pol == Polarity::Positive ? 0 : 1].data;
  return central_lines(full, g.nx, g.ny, n_ref, g.nz * coils.ncoils);
}

// Hybrid (kx, y, z, coil) view of one reference array.
CVec to_hybrid(ReferenceScan const &ref, CVec k) {
  centered_dft(k, {ref.grid.nx, ref.ny_ref, ref.grid.nz * ref.ncoils}, 1, Direction::Inverse);
  return k;
}

struct AxisView {
  Index nu;     // samples along the fitted axis
  double du;    // spacing
  std::vector<double> u; // coordinates, mm
};

AxisView axis_view(ReferenceScan const &ref, Axis axis) {
  AxisView v;
  if (axis == Axis::Y) {
    v.nu = ref.ny_ref;
    v.du = ref.dy_ref();
    for (Index j = 0; j < v.nu; ++j) v.u.push_back(double(j - v.nu / 2) * v.du + ref.grid.offset[1]);
  } else {
    v.nu = ref.grid.nz;
    v.du = ref.grid.dz;
    for (Index j = 0; j < v.nu; ++j) v.u.push_back(ref.grid.coord(Axis::Z, j));
  }
  return v;
}

std::array<CVec, 2> const &wave_data(ReferenceScan const &ref, Axis axis) {
  require(axis == Axis::Y || axis == Axis::Z, "PSF estimation axis must be y or z");
  return axis == Axis::Y ? ref.S_wy : ref.S_wz;
}

// Position along the fitted axis for element (y, z) of the hybrid array.
inline Index u_index(Axis axis, Index y, Index z) { return axis == Axis::Y ? y : z; }

std::vector<double> basis_row(std::vector<double> const &freqs, double tau) {
  std::vector<double> row{1.0};
  for (double f : freqs) {
    double const ph = 2.0 * pi * f * tau;
    row.push_back(std::cos(ph));
    row.push_back(-std::sin(ph));
  }
  return row;
}

double nearest_period(double v, double period) { return period * std::round(v / period); }

// kx index acquired first on a line of this polarity.
Index first_sample(Index nx, Polarity pol) { return pol == Polarity::Positive ? 0 : nx - 1; }

void unwrap_and_anchor(DirectEstimate &d, Polarity pol) {
  Index const nx = Index(d.psi.size());
  Index const start = Index(std::max_element(d.confidence.begin(), d.confidence.end()) - d.confidence.begin());
  for (int dir : {1, -1})
    for (Index k = start + dir; k >= 0 && k < nx; k += dir) {
      double const prev = d.psi[std::size_t(k - dir)];
      d.psi[std::size_t(k)] -= nearest_period(d.psi[std::size_t(k)] - prev, d.period);
    }
  double const shift = nearest_period(d.psi[std::size_t(first_sample(nx, pol))], d.period);
  for (auto &v : d.psi) v -= shift;
}

} // namespace

ReferenceScan simulate_reference(ComplexVolume const &img, CoilMaps const &coils, WaveformSpec const &spec_y,
                                 WaveformSpec const &spec_z, Imperfection const &imp, ReferenceSpec const &rs) {
  require(rs.ky_fraction > 0 && rs.ky_fraction <= 1.0, "reference ky fraction must be in (0, 1]");
  Grid const &g = img.grid;
  ReferenceScan ref;
  ref.grid = g;
  ref.ncoils = coils.ncoils;
  ref.ny_ref = std::max<Index>(2, Index(std::llround(rs.ky_fraction * double(g.ny))));
  ref.ny_ref = std::min(ref.ny_ref, g.ny);

  WaveformSpec y_only = spec_y, z_only = spec_z;
  WaveformSpec y_off = spec_y, z_off = spec_z;
  y_off.G_w = 0.0;
  z_off.G_w = 0.0;
  PsfSet const none = PsfSet::none(g.nx);
  PsfSet const wy = make_psf_set(y_only, z_off, g.nx, imp);
  PsfSet const wz = make_psf_set(y_off, z_only, g.nx, imp);
  for (int p = 0; p < 2; ++p) {
    auto const pol = static_cast<Polarity>(p);
    ref.S_r[p] = acquire(img, coils, none, pol, ref.ny_ref);
    ref.S_wy[p] = acquire(img, coils, wy, pol, ref.ny_ref);
    ref.S_wz[p] = acquire(img, coils, wz, pol, ref.ny_ref);
    add_noise(ref.S_r[p], rs.sigma, rs.seed + 3 * std::uint64_t(p));
    add_noise(ref.S_wy[p], rs.sigma, rs.seed + 3 * std::uint64_t(p) + 1);
    add_noise(ref.S_wz[p], rs.sigma, rs.seed + 3 * std::uint64_t(p) + 2);
  }
  return ref;
}

DirectEstimate estimate_psf_direct(ReferenceScan const &ref, Axis axis, Polarity pol) {
  int const p = static_cast<int>(pol);
  CVec const hw = to_hybrid(ref, wave_data(ref, axis)[p]);
  CVec const hr = to_hybrid(ref, ref.S_r[p]);
  Index const nx = ref.grid.nx, ny = ref.ny_ref, nz = ref.grid.nz;
  AxisView const av = axis_view(ref, axis);

  // Coil-summed cross products, laid out (kx, y, z).
  CVec cross(std::size_t(nx * ny * nz), cplx(0, 0));
  for (Index c = 0; c < ref.ncoils; ++c)
    for (Index i = 0; i < nx * ny * nz; ++i) {
      std::size_t const k = std::size_t(i + c * nx * ny * nz);
      cross[std::size_t(i)] += hw[k] * std::conj(hr[k]);
    }

  DirectEstimate d{std::vector<double>(std::size_t(nx), 0.0), std::vector<double>(std::size_t(nx), 0.0)};
  for (Index k = 0; k < nx; ++k) {
    cplx acc = 0;
    for (Index z = 0; z < nz; ++z)
      for (Index y = 0; y < ny; ++y) {
        Index const u = u_index(axis, y, z);
        if (u + 1 >= av.nu) continue;
        Index const y1 = axis == Axis::Y ? y + 1 : y;
        Index const z1 = axis == Axis::Z ? z + 1 : z;
        acc += cross[std::size_t(k + nx * (y1 + ny * z1))] * std::conj(cross[std::size_t(k + nx * (y + ny * z))]);
      }
    double const mag = std::abs(acc);
    d.confidence[std::size_t(k)] = mag;
    d.psi[std::size_t(k)] = mag > 0 ? -std::arg(acc) / av.du : 0.0;
  }
  d.period = 2.0 * pi / av.du;
  unwrap_and_anchor(d, pol);
  return d;
}

std::vector<double> SparseFreqCoeffs::evaluate(double T_r, Index nx) const {
  auto const tau = sample_times(T_r, nx);
  std::vector<double> psi(static_cast<std::size_t>(nx));
  for (Index k = 0; k < nx; ++k) {
    double v = offset;
    for (std::size_t m = 0; m < freqs.size(); ++m)
      v += (q[m] * std::polar(1.0, 2.0 * pi * freqs[m] * tau[std::size_t(k)])).real();
    psi[std::size_t(k)] = v;
  }
  return psi;
}

std::vector<double> SparseFreqCoeffs::params() const {
  std::vector<double> p{offset};
  for (auto const &v : q) {
    p.push_back(v.real());
    p.push_back(v.imag());
  }
  return p;
}

void SparseFreqCoeffs::set_params(std::vector<double> const &p) {
  require(p.size() == 1 + 2 * q.size(), "SparseFreqCoeffs: parameter count mismatch");
  offset = p[0];
  for (std::size_t m = 0; m < q.size(); ++m) q[m] = {p[1 + 2 * m], p[2 + 2 * m]};
}

std::vector<double> harmonic_basis(WaveformSpec const &spec, int count) {
  require(count >= 1, "auto-PSF basis needs at least one frequency");
  std::vector<double> f;
  for (int m = 1; m <= count; ++m) f.push_back(double(m) * spec.n_c / spec.T_r);
  return f;
}

SparseFreqCoeffs fit_coeffs_to_direct(DirectEstimate const &d, std::vector<double> const &freqs, Axis axis,
                                      Polarity pol, double T_r) {
  Index const nx = Index(d.psi.size());
  auto const tau = sample_times(T_r, nx);
  Index const np = 1 + 2 * Index(freqs.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(np, np);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(np);
  auto accumulate = [&](bool central_only) {
    for (Index k = 0; k < nx; ++k) {
      if (central_only && std::abs(k - nx / 2) > nx / 4) continue;
      double const w = d.confidence[std::size_t(k)];
      if (w <= 0) continue;
      auto const row = basis_row(freqs, tau[std::size_t(k)]);
      for (Index i = 0; i < np; ++i) {
        b(i) += w * row[std::size_t(i)] * d.psi[std::size_t(k)];
        for (Index j = 0; j < np; ++j) A(i, j) += w * row[std::size_t(i)] * row[std::size_t(j)];
      }
    }
  };
  accumulate(true);
  SparseFreqCoeffs c{axis, pol, freqs, std::vector<cplx>(freqs.size()), 0.0};
  if (A.norm() == 0) return c;
  Eigen::VectorXd const x = A.completeOrthogonalDecomposition().solve(b);
  c.set_params(std::vector<double>(x.data(), x.data() + np));
  if (d.period > 0) {
    // Readout start is tau = 0 on positive lines and tau = T_r on negative lines.
    double const tau0 = pol == Polarity::Positive ? 0.0 : T_r;
    double at_start = c.offset;
    for (std::size_t m = 0; m < freqs.size(); ++m) at_start += (c.q[m] * std::polar(1.0, 2.0 * pi * freqs[m] * tau0)).real();
    c.offset -= nearest_period(at_start, d.period);
  }
  return c;
}

AutoFit estimate_psf_auto(ReferenceScan const &ref, Axis axis, Polarity pol, double T_r, SparseFreqCoeffs const &init) {
  require(!init.freqs.empty() && init.freqs.size() == init.q.size(), "auto-PSF: basis must be non-empty");
  int const p = static_cast<int>(pol);
  CVec const hw = to_hybrid(ref, wave_data(ref, axis)[p]);
  CVec const hr = to_hybrid(ref, ref.S_r[p]);
  Index const nx = ref.grid.nx, ny = ref.ny_ref, nz = ref.grid.nz, nc = ref.ncoils;
  AxisView const av = axis_view(ref, axis);
  auto const tau = sample_times(T_r, nx);

  // Per (kx, u): w = sum conj(h_r) h_w and a = sum |h_r|^2 over the other axis and coils.
  CVec w(std::size_t(nx * av.nu), cplx(0, 0));
  std::vector<double> a(std::size_t(nx * av.nu), 0.0);
  for (Index c = 0; c < nc; ++c)
    for (Index z = 0; z < nz; ++z)
      for (Index y = 0; y < ny; ++y) {
        Index const u = u_index(axis, y, z);
        for (Index k = 0; k < nx; ++k) {
          std::size_t const i = std::size_t(k + nx * (y + ny * (z + nz * c)));
          w[std::size_t(k + nx * u)] += std::conj(hr[i]) * hw[i];
          a[std::size_t(k + nx * u)] += std::norm(hr[i]);
        }
      }

  std::vector<std::vector<double>> B;
  for (Index k = 0; k < nx; ++k) B.push_back(basis_row(init.freqs, tau[std::size_t(k)]));
  Index const np = Index(B[0].size());

  auto psi_of = [&](std::vector<double> const &th) {
    std::vector<double> psi(static_cast<std::size_t>(nx), 0.0);
    for (Index k = 0; k < nx; ++k)
      for (Index j = 0; j < np; ++j) psi[std::size_t(k)] += B[std::size_t(k)][std::size_t(j)] * th[std::size_t(j)];
    return psi;
  };
  auto cost_of = [&](std::vector<double> const &psi, double ulim) {
    std::vector<cplx> e(std::size_t(nx * av.nu));
    for (Index u = 0; u < av.nu; ++u)
      for (Index k = 0; k < nx; ++k) e[std::size_t(k + nx * u)] = std::polar(1.0, -psi[std::size_t(k)] * av.u[std::size_t(u)]);
    double f = 0;
    for (Index c = 0; c < nc; ++c)
      for (Index z = 0; z < nz; ++z)
        for (Index y = 0; y < ny; ++y) {
          Index const u = u_index(axis, y, z);
          if (std::abs(av.u[std::size_t(u)]) > ulim) continue;
          for (Index k = 0; k < nx; ++k) {
            std::size_t const i = std::size_t(k + nx * (y + ny * (z + nz * c)));
            f += std::norm(e[std::size_t(k + nx * u)] * hr[i] - hw[i]);
          }
        }
    return f;
  };

  // Aperture continuation: the objective oscillates in psi * u, so fit small |u|
  // first and widen. Stages with fewer than three positions are skipped.
  double umax = 0;
  for (double u : av.u) umax = std::max(umax, std::abs(u));
  std::vector<double> limits;
  Index last_count = 0;
  for (double frac : {0.125, 0.25, 0.5, 1.0}) {
    Index count = 0;
    for (double u : av.u) count += std::abs(u) <= frac * umax;
    if ((count >= 3 && count > last_count) || frac == 1.0) limits.push_back(frac == 1.0 ? umax : frac * umax);
    last_count = std::max(last_count, count);
  }

  AutoFit out;
  out.coeffs = init;
  std::vector<double> theta = init.params();
  std::vector<double> psi = psi_of(theta);
  for (std::size_t stage = 0; stage < limits.size(); ++stage) {
    double const ulim = limits[stage];
    bool const final_stage = stage + 1 == limits.size();
    double f = cost_of(psi, ulim);
    if (final_stage) out.cost.push_back(f);
    double lambda = 1e-3;
    for (int it = 0; it < 100 && f > 0; ++it) {
      ++out.iterations;
      // Gradient and Gauss-Newton curvature with respect to psi_k, chained through the basis.
      Eigen::VectorXd g = Eigen::VectorXd::Zero(np);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(np, np);
      for (Index k = 0; k < nx; ++k) {
        cplx s = 0;
        double h = 0;
        for (Index u = 0; u < av.nu; ++u) {
          double const uu = av.u[std::size_t(u)];
          if (std::abs(uu) > ulim) continue;
          s += uu * std::polar(1.0, psi[std::size_t(k)] * uu) * w[std::size_t(k + nx * u)];
          h += uu * uu * a[std::size_t(k + nx * u)];
        }
        double const gk = 2.0 * s.imag();
        double const hk = 2.0 * h;
        auto const &row = B[std::size_t(k)];
        for (Index i = 0; i < np; ++i) {
          g(i) += row[std::size_t(i)] * gk;
          for (Index j = 0; j < np; ++j) H(i, j) += hk * row[std::size_t(i)] * row[std::size_t(j)];
        }
      }
      bool accepted = false;
      while (!accepted && lambda < 1e12) {
        Eigen::MatrixXd Hd = H;
        for (Index i = 0; i < np; ++i) Hd(i, i) += lambda * std::max(H(i, i), 1e-300);
        Eigen::VectorXd const step = Hd.ldlt().solve(-g);
        std::vector<double> trial = theta;
        for (Index i = 0; i < np; ++i) trial[std::size_t(i)] += step(i);
        auto const psi_t = psi_of(trial);
        double const ft = cost_of(psi_t, ulim);
        if (!std::isfinite(ft)) throw Error(ErrorKind::Divergence, "auto-PSF: non-finite residual", out.cost);
        if (ft < f) {
          accepted = true;
          double const rel = (f - ft) / f;
          theta = trial;
          psi = psi_t;
          f = ft;
          if (final_stage) out.cost.push_back(f);
          lambda *= 0.5;
          if (rel < 1e-10) it = 100;
        } else {
          lambda *= 2.0;
        }
      }
      if (!accepted) break;
    }
  }
  for (std::size_t i = 1; i < out.cost.size(); ++i)
    if (out.cost[i] > out.cost[i - 1]) throw Error(ErrorKind::Divergence, "auto-PSF: objective increased", out.cost);
  out.coeffs.set_params(theta);
  return out;
}

PsfSet build_dual_psfs(CoeffTable const &coeffs, double T_r, Index nx) {
  PsfSet s;
  for (int p = 0; p < 2; ++p) {
    s.psi_y[p] = coeffs[0][p].evaluate(T_r, nx);
    s.psi_z[p] = coeffs[1][p].evaluate(T_r, nx);
  }
  return s;
}

Calibration calibrate(ReferenceScan const &ref, WaveformSpec const &spec_y, WaveformSpec const &spec_z, int harmonics) {
  Calibration cal;
  for (int a = 0; a < 2; ++a) {
    Axis const axis = a == 0 ? Axis::Y : Axis::Z;
    WaveformSpec const &spec = a == 0 ? spec_y : spec_z;
    auto const freqs = harmonic_basis(spec, harmonics);
    for (int p = 0; p < 2; ++p) {
      auto const pol = static_cast<Polarity>(p);
      cal.direct[a][p] = estimate_psf_direct(ref, axis, pol);
      auto const init = fit_coeffs_to_direct(cal.direct[a][p], freqs, axis, pol, spec.T_r);
      cal.fits[a][p] = estimate_psf_auto(ref, axis, pol, spec.T_r, init);
      cal.coeffs[a][p] = cal.fits[a][p].coeffs;
    }
  }
  cal.psfs = build_dual_psfs(cal.coeffs, spec_y.T_r, ref.grid.nx);
  return cal;
}

} // namespace wave
