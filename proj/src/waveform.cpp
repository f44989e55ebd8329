#include "wave/waveform.hpp"

#include "wave/error.hpp"

#include <cmath>

namespace wave {

char const *to_string(Polarity p) noexcept { return p == Polarity::Positive ? "positive" : "negative"; }

void WaveformSpec::validate() const {
  require(G_w >= 0 && std::isfinite(G_w), "wave amplitude G_w must be >= 0");
  require(T_r > 0, "readout duration T_r must be > 0");
  require(n_c > 0, "wave cycles n_c must be > 0");
  require(G_x > 0, "readout gradient G_x must be > 0");
  require(R_max > 0, "slew limit R_max must be > 0");
  require(axis != Axis::X, "wave axis must be y or z");
}

std::vector<double> sample_times(double T_r, Index nx) {
  std::vector<double> t(static_cast<std::size_t>(nx));
  for (Index j = 0; j < nx; ++j) t[std::size_t(j)] = (double(j) + 0.5) * T_r / double(nx);
  return t;
}

double gradient_at(WaveformSpec const &spec, double t) {
  double const w = 2.0 * pi * spec.n_c / spec.T_r;
  return spec.shape == WaveShape::Cosine ? spec.G_w * std::cos(w * t) : spec.G_w * std::sin(w * t);
}

double gradient_integral(WaveformSpec const &spec, double t) {
  double const w = 2.0 * pi * spec.n_c / spec.T_r;
  return spec.shape == WaveShape::Cosine ? spec.G_w * std::sin(w * t) / w : spec.G_w * (1.0 - std::cos(w * t)) / w;
}

std::vector<double> make_waveform(WaveformSpec const &spec, Index nx) {
  spec.validate();
  require(nx >= 2, "make_waveform: nx must be >= 2");
  auto const t = sample_times(spec.T_r, nx);
  std::vector<double> g(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) g[j] = gradient_at(spec, t[j]);
  return g;
}

SlewCheck check_slew(WaveformSpec const &spec) {
  spec.validate();
  double const allowed = spec.R_max * spec.T_r / (2.0 * pi * spec.n_c);
  return {spec.G_w <= allowed * (1.0 + 1e-9), allowed};
}

double displacement(WaveformSpec const &spec, double t, double y) {
  spec.validate();
  require(t >= 0 && t <= spec.T_r * (1 + 1e-12), "displacement: t outside the readout");
  double const u = 2.0 * pi * spec.n_c * t / spec.T_r;
  double const ratio = spec.G_w / spec.G_x;
  if (spec.shape == WaveShape::Cosine) return y * ratio * (u == 0.0 ? 1.0 : std::sin(u) / u);
  return y * ratio * (u == 0.0 ? 0.0 : (1.0 - std::cos(u)) / u);
}

double max_spreading_bound(WaveformSpec const &spec) { return check_slew(spec).max_gw_allowed / spec.G_x; }

bool Psf::identity() const {
  for (double v : phase_slope)
    if (v != 0.0) return false;
  return true;
}

Psf make_axis_psf(WaveformSpec const &spec, Index nx, Polarity pol, Imperfection const &imp) {
  spec.validate();
  require(nx >= 2, "make_psf: nx must be >= 2");
  Psf p{spec.axis, pol, std::vector<double>(std::size_t(nx), 0.0)};
  if (spec.off()) return p;
  int const k = static_cast<int>(pol);
  double const s = imp.scale[k];
  double const d = imp.delay_ms[k];
  double const T = spec.T_r;
  auto const t = sample_times(T, nx);
  for (Index j = 0; j < nx; ++j) {
    double const tj = t[std::size_t(j)];
    if (pol == Polarity::Positive) {
      p.phase_slope[std::size_t(j)] = kGammaMm * s * (gradient_integral(spec, tj - d) - gradient_integral(spec, -d));
    } else {
      double const v = s * (gradient_integral(spec, T + d - tj) - gradient_integral(spec, T + d));
      p.phase_slope[std::size_t(nx - 1 - j)] = kGammaMm * v;
    }
  }
  return p;
}

std::pair<Psf, Psf> make_psf(WaveformSpec const &spec_y, WaveformSpec const &spec_z, Index nx, Polarity pol,
                             Imperfection const &imp) {
  require(std::abs(spec_y.T_r - spec_z.T_r) <= 1e-12 * spec_y.T_r, "make_psf: y and z waveforms must share T_r");
  return {make_axis_psf(spec_y, nx, pol, imp), make_axis_psf(spec_z, nx, pol, imp)};
}

bool PsfSet::polarities_identical() const { return psi_y[0] == psi_y[1] && psi_z[0] == psi_z[1]; }

bool PsfSet::identity() const {
  for (int p = 0; p < 2; ++p)
    for (std::size_t k = 0; k < psi_y[p].size(); ++k)
      if (psi_y[p][k] != 0.0 || psi_z[p][k] != 0.0) return false;
  return true;
}

PsfSet PsfSet::none(Index nx) {
  PsfSet s;
  for (int p = 0; p < 2; ++p) {
    s.psi_y[p].assign(static_cast<std::size_t>(nx), 0.0);
    s.psi_z[p].assign(static_cast<std::size_t>(nx), 0.0);
  }
  return s;
}

PsfSet PsfSet::single() const {
  PsfSet s = *this;
  s.psi_y[1] = psi_y[0];
  s.psi_z[1] = psi_z[0];
  return s;
}

PsfSet make_psf_set(WaveformSpec const &spec_y, WaveformSpec const &spec_z, Index nx, Imperfection const &imp) {
  PsfSet s;
  for (int p = 0; p < 2; ++p) {
    auto [py, pz] = make_psf(spec_y, spec_z, nx, static_cast<Polarity>(p), imp);
    s.psi_y[p] = std::move(py.phase_slope);
    s.psi_z[p] = std::move(pz.phase_slope);
  }
  return s;
}

} // namespace wave
