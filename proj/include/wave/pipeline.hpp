#pragma once

#include "wave/calibration.hpp"
#include "wave/config.hpp"
#include "wave/forward.hpp"
#include "wave/metrics.hpp"
#include "wave/recon.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wave {

/// Everything a configuration determines before any data exists.
struct Experiment {
  ExperimentConfig cfg;
  Grid thin;
  Grid slab;
  ComplexVolume phantom;
  std::vector<char> mask;
  std::shared_ptr<CoilMaps const> coils;
  SamplingPattern pattern;
  PsfSet true_psfs;
  ShotPhase phases; // thin grid, empty when shot_phase_rad == 0

  /// Thin-grid encoding with the given PSFs; phases included on request.
  EncodingContext context(PsfSet const &psfs, bool with_phases) const;
};

/// Throws Error(SlewViolation) when a wave exceeds the slew limit and
/// `allow_slew_violation` is false.
Experiment build_experiment(ExperimentConfig const &cfg, bool allow_slew_violation = false);

/// Noise std per real/imag part for a target SNR: mean |phantom| over support / snr.
double noise_sigma(ComplexVolume const &phantom, std::vector<char> const &mask, double snr);

/// Encodes the phantom with true PSFs and phases, then adds noise when cfg.snr > 0.
ShotDataSet simulate(Experiment const &ex);

Calibration run_calibration(Experiment const &ex);

/// PSFs handed to the reconstruction; `cal` is required for calibrated/single.
PsfSet recon_psfs(Experiment const &ex, PsfSource src, Calibration const *cal);

struct ReconOutput {
  std::string method;
  ComplexVolume image;
  std::optional<ComplexVolume> naive;       // adjoint combination for multi-shot modes
  std::optional<ComplexVolume> uncorrected; // joint SENSE ignoring shot phases
  std::vector<double> residual;
  std::vector<double> cost;
  int iterations = 0;
  bool converged = false;
};

ReconOutput reconstruct(Experiment const &ex, ShotDataSet const &data, PsfSet const &psfs);

/// Configuration for one g-factor method: "r1", "blipped", "wave" or
/// "wave_one_cycle" (n_c_y = 1 at half the amplitude, equal slew).
ExperimentConfig gfactor_variant(ExperimentConfig cfg, std::string const &method);

struct GFactorRun {
  std::string method;
  std::string solver; // "direct" or "cg"
  GFactorResult result;
  Index total_lines = 0;
};

/// Pseudo-replica g-factor of SENSE with true PSFs. The "auto" solver uses the
/// dense per-group solve up to kDenseGroupLimit unknowns per SMS group.
inline constexpr Index kDenseGroupLimit = 4096;
GFactorRun run_gfactor(ExperimentConfig const &cfg, std::string const &method);

} // namespace wave
