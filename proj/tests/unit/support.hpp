#pragma once

#include "wave/forward.hpp"
#include "wave/linop.hpp"

#include <cmath>
#include <random>

namespace wave::test {

inline ComplexVolume random_volume(Grid const &g, std::uint64_t seed) {
  return ComplexVolume(g, random_cvec(g.size(), seed));
}

inline Grid make_grid(Index nx, Index ny, Index nz, double dx = 3.0, double dz = 5.0) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.dx = dx;
  g.dy = dx;
  g.dz = dz;
  return g;
}

inline double max_abs_diff(CVec const &a, CVec const &b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_diff(CVec const &a, CVec const &b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

inline double norm2(CVec const &a) {
  double s = 0;
  for (auto const &v : a) s += std::norm(v);
  return s;
}

inline EncodingContext basic_context(Grid const &g, std::shared_ptr<CoilMaps const> coils, PsfSet psfs,
                                     SamplingPattern pattern) {
  EncodingContext ctx;
  ctx.grid = g;
  ctx.coils = std::move(coils);
  ctx.psfs = std::move(psfs);
  ctx.pattern = std::move(pattern);
  ctx.slider = SliderEncoding::identity(1);
  return ctx;
}

inline WaveformSpec wave_y(double G_w, double n_c, double T_r) {
  WaveformSpec s;
  s.axis = Axis::Y;
  s.shape = WaveShape::Cosine;
  s.G_w = G_w;
  s.n_c = n_c;
  s.T_r = T_r;
  s.R_max = 1e6;
  return s;
}

inline WaveformSpec wave_z(double G_w, double n_c, double T_r) {
  WaveformSpec s = wave_y(G_w, n_c, T_r);
  s.axis = Axis::Z;
  s.shape = WaveShape::Sine;
  return s;
}

} // namespace wave::test
