#include "wave/metrics.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"
#include "wave/parallel.hpp"
#include "wave/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace wave {

namespace {
bool in_mask(std::vector<char> const &mask, std::size_t i) { return mask.empty() || mask[i]; }
} // namespace

double nrmse(ComplexVolume const &a, ComplexVolume const &b, std::vector<char> const &mask) {
  require(a.data.size() == b.data.size(), "nrmse: shape mismatch");
  require(mask.empty() || mask.size() == a.data.size(), "nrmse: mask shape mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (in_mask(mask, i)) {
      num += std::norm(a.data[i] - b.data[i]);
      den += std::norm(b.data[i]);
    }
  if (den == 0.0) fail("nrmse: reference has zero norm over the mask");
  return std::sqrt(num / den);
}

double nrmse_magnitude(ComplexVolume const &a, ComplexVolume const &b, std::vector<char> const &mask) {
  require(a.data.size() == b.data.size(), "nrmse: shape mismatch");
  require(mask.empty() || mask.size() == a.data.size(), "nrmse: mask shape mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (in_mask(mask, i)) {
      double const d = std::abs(a.data[i]) - std::abs(b.data[i]);
      num += d * d;
      den += std::norm(b.data[i]);
    }
  if (den == 0.0) fail("nrmse: reference has zero norm over the mask");
  return std::sqrt(num / den);
}

double ghost_energy(ComplexVolume const &img, std::vector<char> const &mask) {
  Grid const &g = img.grid;
  require(mask.size() == img.data.size(), "ghost_energy: mask shape mismatch");
  double in = 0, out = 0;
  Index nin = 0, nout = 0;
  for (Index z = 0; z < g.nz; ++z)
    for (Index y = 0; y < g.ny; ++y)
      for (Index x = 0; x < g.nx; ++x) {
        std::size_t const i = std::size_t(g.index(x, y, z));
        std::size_t const src = std::size_t(g.index(x, (y - g.ny / 2 + g.ny) % g.ny, z));
        double const m = std::abs(img.data[i]);
        if (mask[i]) {
          in += m;
          ++nin;
        } else if (mask[src]) {
          out += m;
          ++nout;
        }
      }
  if (nin == 0 || nout == 0 || in == 0.0) fail("ghost_energy: empty mask or ghost region");
  return (out / double(nout)) / (in / double(nin));
}

std::vector<double> reference_std(CoilMaps const &coils, double sigma) {
  auto rss = coils.rss();
  for (auto &v : rss) v = v > 0 ? std::sqrt(2.0) * sigma / v : 0.0;
  return rss;
}

double effective_r(SamplingPattern const &p) {
  Index const lines = p.total_lines();
  require(lines > 0, "effective_r: pattern acquires no lines");
  return double(p.ny) / double(lines);
}

GFactorResult gfactor_pseudo_replica(ReconFn const &recon, ShotDataSet const &clean, std::vector<double> const &ref_std,
                                     double r_eff, std::vector<char> const &mask, double sigma, int n_replicas,
                                     std::uint64_t seed) {
  require(n_replicas >= 50, "gfactor: need at least 50 replicas");
  require(sigma > 0, "gfactor: sigma must be > 0");
  require(r_eff > 0, "gfactor: effective R must be > 0");
  std::size_t const n = ref_std.size();
  require(mask.empty() || mask.size() == n, "gfactor: mask shape mismatch");
  CVec const base = clean.flatten();

  // Welford accumulation in replica order keeps the result independent of threading.
  CVec mean(n, cplx(0, 0));
  std::vector<double> m2(n, 0.0);
  Index done = 0;
  Index const chunk = std::max(1, thread_count());
  for (Index start = 0; start < n_replicas; start += chunk) {
    Index const cnt = std::min<Index>(chunk, n_replicas - start);
    std::vector<ComplexVolume> out(static_cast<std::size_t>(cnt));
    parallel_for(cnt, [&](Index j) {
      ShotDataSet d = clean;
      CVec noisy = base;
      add_noise(noisy, sigma, seed + std::uint64_t(start + j));
      d.assign(noisy);
      d.sigma = sigma;
      out[std::size_t(j)] = recon(d);
      require(out[std::size_t(j)].data.size() == n, "gfactor: reconstruction size mismatch");
    });
    for (auto const &img : out) {
      ++done;
      for (std::size_t i = 0; i < n; ++i) {
        cplx const delta = img.data[i] - mean[i];
        mean[i] += delta / double(done);
        m2[i] += std::real(std::conj(delta) * (img.data[i] - mean[i]));
      }
    }
  }

  GFactorResult res;
  res.r_eff = r_eff;
  res.gmap.assign(n, 0.0);
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_mask(mask, i)) continue;
    if (ref_std[i] <= 0) {
      ++res.excluded;
      continue;
    }
    double const sd = std::sqrt(m2[i] / double(done - 1));
    double const gv = sd / (ref_std[i] * std::sqrt(r_eff));
    res.gmap[i] = gv;
    sum += gv;
    res.max_g = std::max(res.max_g, gv);
    ++res.voxels;
  }
  if (res.voxels == 0) fail("gfactor: no voxels with a valid reference");
  res.mean_g = sum / double(res.voxels);
  return res;
}

double fwhm_samples(std::vector<double> const &p) {
  require(!p.empty(), "fwhm: empty profile");
  Index const n = Index(p.size());
  Index const c = Index(std::max_element(p.begin(), p.end()) - p.begin());
  double const half = 0.5 * p[std::size_t(c)];
  double right = double(n - 1), left = 0.0;
  for (Index i = c + 1; i < n; ++i)
    if (p[std::size_t(i)] < half) {
      double const a = p[std::size_t(i - 1)], b = p[std::size_t(i)];
      right = double(i - 1) + (a - half) / (a - b);
      break;
    }
  for (Index i = c - 1; i >= 0; --i)
    if (p[std::size_t(i)] < half) {
      double const a = p[std::size_t(i + 1)], b = p[std::size_t(i)];
      left = double(i + 1) - (a - half) / (a - b);
      break;
    }
  return right - left;
}

double max_sidelobe_fraction(std::vector<double> const &p) {
  Index const n = Index(p.size());
  Index const c = Index(std::max_element(p.begin(), p.end()) - p.begin());
  double const peak = p[std::size_t(c)];
  double side = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(i - c) >= 2) side = std::max(side, p[std::size_t(i)]);
  return peak > 0 ? side / peak : 0.0;
}

namespace {

std::vector<std::vector<double>> thin_profiles(PsfProfileSpec const &s, PsfRecon mode) {
  Index const x0 = s.impulse < 0 ? s.nx / 2 : s.impulse;
  Index const nx = s.nx, D = s.dwell_super, S = s.sub_per_thin;
  double const T = s.spec_z.T_r;
  auto psi_at = [&](double t) { return kGammaMm * gradient_integral(s.spec_z, t); };
  auto const tk = sample_times(T, nx);

  // Spectrum of the on-grid readout impulse, centered convention.
  CVec impulse(static_cast<std::size_t>(nx), cplx(0, 0));
  impulse[std::size_t(x0)] = 1.0;
  centered_dft(impulse, {nx, 1, 1}, 0, Direction::Forward);

  double const slab_center = 0.0;
  std::vector<std::vector<double>> out;
  for (Index t = 0; t < s.n_thin; ++t) {
    double const zc = (double(t) - 0.5 * double(s.n_thin - 1)) * s.thin_mm;
    double const z_deconv = mode == PsfRecon::Standard ? slab_center : zc;
    CVec sig(static_cast<std::size_t>(nx));
    for (Index k = 0; k < nx; ++k) {
      cplx acc = 0;
      for (Index j = 0; j < D; ++j) {
        double const tau = (double(k) + (double(j) + 0.5) / double(D)) * T / double(nx);
        double const ps = psi_at(tau);
        for (Index i = 0; i < S; ++i) {
          double const z = zc + ((double(i) + 0.5) / double(S) - 0.5) * s.thin_mm;
          acc += std::polar(1.0, -ps * z);
        }
      }
      acc /= double(D * S);
      double const psi_k = psi_at(tk[std::size_t(k)]);
      sig[std::size_t(k)] = impulse[std::size_t(k)] * acc * std::polar(1.0, psi_k * z_deconv);
    }
    centered_dft(sig, {nx, 1, 1}, 0, Direction::Inverse);
    std::vector<double> prof(static_cast<std::size_t>(nx));
    double peak = 0;
    for (Index k = 0; k < nx; ++k) peak = std::max(peak, std::abs(sig[std::size_t(k)]));
    for (Index k = 0; k < nx; ++k) prof[std::size_t(k)] = peak > 0 ? std::abs(sig[std::size_t(k)]) / peak : 0.0;
    out.push_back(std::move(prof));
  }
  return out;
}

} // namespace

PsfProfileResult psf_profile(PsfProfileSpec const &s, PsfRecon mode) {
  s.spec_z.validate();
  require(s.nx >= 8 && s.n_thin >= 1 && s.thin_mm > 0 && s.dx > 0, "psf_profile: bad geometry");
  require(s.dwell_super >= 8, "psf_profile: readout supersampling must be >= 8");
  require(s.sub_per_thin * s.n_thin >= 16, "psf_profile: need at least 16 sub-slices per slab");
  Index const x0 = s.impulse < 0 ? s.nx / 2 : s.impulse;
  if (x0 < 0 || x0 >= s.nx) fail("psf_profile: impulse outside the readout support");

  PsfProfileSpec flat = s;
  flat.spec_z.G_w = 0.0;
  double nominal = 0;
  for (auto const &p : thin_profiles(flat, mode)) nominal = std::max(nominal, fwhm_samples(p) * s.dx);

  PsfProfileResult res;
  res.profiles = thin_profiles(s, mode);
  for (auto const &p : res.profiles) {
    res.fwhm_mm = std::max(res.fwhm_mm, fwhm_samples(p) * s.dx);
    res.max_sidelobe = std::max(res.max_sidelobe, max_sidelobe_fraction(p));
  }
  res.fwhm_extension_mm = res.fwhm_mm - nominal;
  return res;
}

} // namespace wave
