#pragma once

#include "wave/forward.hpp"
#include "wave/hankel.hpp"
#include "wave/metrics.hpp"
#include "wave/phantom.hpp"
#include "wave/waveform.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace wave {

enum class ReconMode { Sense, Multishot, GsliderJoint };
enum class PsfSource { True, Calibrated, Single, None };

char const *to_string(ReconMode m) noexcept;

/// Typed view of a resolved experiment document. Units: mm, ms, mT/m, T/m/s.
struct ExperimentConfig {
  Grid grid; // thin-slice image grid
  PhantomSpec phantom;
  CoilSpec coils;
  bool uniform_coils = false;

  WaveformSpec wave_y;
  WaveformSpec wave_z;
  Imperfection imperfection;

  double ref_ky_fraction = 1.0;
  double ref_snr = 0.0; // 0 = noiseless reference
  int harmonics = 2;
  std::uint64_t ref_seed = 11;

  Index R_in = 1, R_sms = 1, n_shots = 1;
  double partial_fourier = 1.0;
  Index caipi_den = 0; // 0 = R_sms
  double shot_phase_rad = 0.0;
  int shot_phase_cycles = 2;
  std::uint64_t shot_phase_seed = 5;
  ShotInterleave shot_interleave = ShotInterleave::Spread;

  SliderEncoding slider;

  ReconMode mode = ReconMode::Sense;
  PsfSource psf = PsfSource::True;
  double tol = 1e-6;
  int max_iters = 50;
  LowRankConfig lowrank;
  double lowpass_fraction = 0.25;

  double snr = 0.0; // 0 = noiseless data
  std::uint64_t seed = 1234;
  int replicas = 200;
  double gfactor_tol = 1e-4;
  int gfactor_max_iters = 100;
  std::vector<std::string> gfactor_methods;
  std::string gfactor_solver = "auto"; // auto | direct | cg

  PsfProfileSpec psf_analysis;
  double psf_analysis_G_w_y = 22.0;

  std::string output_dir = "out";
};

/// Built-in defaults as a document; every accepted key appears here.
nlohmann::json default_config_json();

/// Deep-merges `user` onto the defaults, rejecting unknown keys.
nlohmann::json resolve_config(nlohmann::json const &user);

/// Applies a dotted override such as "sampling.R_in=4". The value is parsed
/// as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json &doc, std::string const &assignment);

/// Validates and converts a resolved document. Throws Error(InvalidConfig).
ExperimentConfig parse_config(nlohmann::json const &resolved);

/// Readout gradient that covers k-space at the grid's dx within T_r.
double readout_gradient(double dx_mm, double T_r_ms);

} // namespace wave
