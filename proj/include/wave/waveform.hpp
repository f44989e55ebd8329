#pragma once

#include "wave/grid.hpp"

#include <array>
#include <vector>

namespace wave {

/// rad / (ms * mT/m * mm): psi [rad/mm] = kGammaMm * integral of g [mT/m] dt [ms].
inline constexpr double kGammaMm = 2.0 * pi * 42.577e-3;

enum class WaveShape { Cosine, Sine };
enum class Polarity { Positive = 0, Negative = 1 };

char const *to_string(Polarity p) noexcept;

struct WaveformSpec {
  Axis axis = Axis::Y;
  WaveShape shape = WaveShape::Cosine;
  double G_w = 0.0;   // mT/m
  double n_c = 0.5;   // cycles per readout
  double T_r = 1.0;   // ms
  double G_x = 30.0;  // mT/m
  double R_max = 180; // T/m/s (= mT/m per ms)

  void validate() const;
  bool off() const { return G_w == 0.0; }
};

/// Per-polarity gradient imperfection: the played waveform is
/// scale * g_nominal(t - delay_ms).
struct Imperfection {
  std::array<double, 2> delay_ms{0.0, 0.0};
  std::array<double, 2> scale{1.0, 1.0};
};

/// Readout sample times t_j = (j + 0.5) * T_r / nx.
std::vector<double> sample_times(double T_r, Index nx);

/// Nominal positive-polarity gradient g(t) in mT/m.
double gradient_at(WaveformSpec const &spec, double t_ms);
/// Antiderivative of gradient_at with A(0) = 0, in mT/m * ms.
double gradient_integral(WaveformSpec const &spec, double t_ms);
std::vector<double> make_waveform(WaveformSpec const &spec, Index nx);

struct SlewCheck {
  bool ok;
  double max_gw_allowed; // mT/m
};
SlewCheck check_slew(WaveformSpec const &spec);

/// Readout-direction displacement (mm) of a voxel at y (mm) at time t (ms).
double displacement(WaveformSpec const &spec, double t_ms, double y_mm);
/// Slew-limited spreading bound, mm of displacement per mm of off-center distance.
double max_spreading_bound(WaveformSpec const &spec);

/// Wave phase slope psi(kx) in rad/mm for one axis and readout polarity,
/// indexed by kx sample (not by acquisition time).
struct Psf {
  Axis axis = Axis::Y;
  Polarity polarity = Polarity::Positive;
  std::vector<double> phase_slope;

  bool identity() const;
};

/// psi for one axis and polarity. Positive lines map sample j to kx index j;
/// negative lines play -g(T_r - t), shifted/scaled by the imperfection, and map
/// sample j to kx index nx-1-j.
Psf make_axis_psf(WaveformSpec const &spec, Index nx, Polarity pol, Imperfection const &imp = {});
std::pair<Psf, Psf> make_psf(WaveformSpec const &spec_y, WaveformSpec const &spec_z, Index nx, Polarity pol,
                             Imperfection const &imp = {});

/// Four multipliers: [polarity] x {y, z}.
struct PsfSet {
  std::array<std::vector<double>, 2> psi_y;
  std::array<std::vector<double>, 2> psi_z;

  Index nx() const { return Index(psi_y[0].size()); }
  bool polarities_identical() const;
  bool identity() const;
  static PsfSet none(Index nx);
  /// Positive-polarity pair reused for both polarities.
  PsfSet single() const;
};

PsfSet make_psf_set(WaveformSpec const &spec_y, WaveformSpec const &spec_z, Index nx, Imperfection const &imp = {});

} // namespace wave
