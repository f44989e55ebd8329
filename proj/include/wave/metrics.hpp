#pragma once

#include "wave/forward.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace wave {

/// |a - b| / |b| over the mask (empty mask = all voxels).
double nrmse(ComplexVolume const &a, ComplexVolume const &b, std::vector<char> const &mask = {});
/// Same on magnitudes.
double nrmse_magnitude(ComplexVolume const &a, ComplexVolume const &b, std::vector<char> const &mask = {});

/// Mean |img| over (mask shifted by ny/2 in y, minus mask) divided by mean |img| over mask.
double ghost_energy(ComplexVolume const &img, std::vector<char> const &mask);

struct GFactorResult {
  std::vector<double> gmap; // 0 outside the mask or where excluded
  double mean_g = 0.0;
  double max_g = 0.0;
  Index voxels = 0;
  Index excluded = 0;
  double r_eff = 1.0;
};

using ReconFn = std::function<ComplexVolume(ShotDataSet const &)>;

/// Noise std of a fully sampled R=1 SENSE reconstruction: sqrt(2) sigma / sqrt(sum_c |C_c|^2).
std::vector<double> reference_std(CoilMaps const &coils, double sigma);

/// Acquired-line reduction ny / (lines summed over shots); SMS is not counted.
double effective_r(SamplingPattern const &p);

/// g = std over replicas of recon(clean + noise_i) / (ref_std * sqrt(r_eff)),
/// noise_i seeded with seed + i.
GFactorResult gfactor_pseudo_replica(ReconFn const &recon, ShotDataSet const &clean, std::vector<double> const &ref_std,
                                     double r_eff, std::vector<char> const &mask, double sigma, int n_replicas,
                                     std::uint64_t seed);

struct PsfProfileSpec {
  WaveformSpec spec_z;       // slice-direction wave
  Index nx = 220;            // readout samples
  double dx = 1.0;           // mm
  Index n_thin = 5;          // thin slices per slab
  double thin_mm = 1.0;
  Index sub_per_thin = 8;    // sub-slices per thin slice
  Index dwell_super = 8;     // phase samples per dwell window
  Index impulse = -1;        // readout index, -1 = nx / 2
};

enum class PsfRecon { Standard, Joint };

struct PsfProfileResult {
  double fwhm_mm = 0.0;           // widest over thin slices
  double fwhm_extension_mm = 0.0; // relative to the no-wave profile
  double max_sidelobe = 0.0;      // max |p| at >= 2 voxels from the peak, over the peak
  std::vector<std::vector<double>> profiles; // normalized magnitude per thin slice
};

/// Readout profile of a slab-thick impulse. Standard deconvolves every thin
/// slice with the slab-center PSF and inverts the slab encoding; Joint uses
/// thin-slice-center PSFs. Intra-slab phase is integrated over sub-slices and
/// dwell sub-samples.
PsfProfileResult psf_profile(PsfProfileSpec const &spec, PsfRecon mode);

/// Half-maximum width by linear interpolation of the crossings, in samples.
double fwhm_samples(std::vector<double> const &p);
double max_sidelobe_fraction(std::vector<double> const &p);

} // namespace wave
