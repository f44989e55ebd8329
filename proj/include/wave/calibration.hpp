#pragma once

#include "wave/forward.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wave {

/// Fully sampled reference k-space per polarity, laid out (kx, ky, z, coil)
/// with kx fastest. ky holds the central `ny_ref` lines of the imaging grid.
struct ReferenceScan {
  Grid grid; // imaging grid; the reference samples its central ny_ref ky lines
  Index ny_ref = 0;
  Index ncoils = 0;
  std::array<CVec, 2> S_r;  // no wave
  std::array<CVec, 2> S_wy; // y wave only
  std::array<CVec, 2> S_wz; // z wave only

  /// y spacing of the low-resolution reference image.
  double dy_ref() const { return grid.dy * double(grid.ny) / double(ny_ref); }
};

struct ReferenceSpec {
  double ky_fraction = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 11;
};

ReferenceScan simulate_reference(ComplexVolume const &img, CoilMaps const &coils, WaveformSpec const &spec_y,
                                 WaveformSpec const &spec_z, Imperfection const &imp, ReferenceSpec const &ref);

struct DirectEstimate {
  std::vector<double> psi;        // rad/mm per kx index
  std::vector<double> confidence; // 0 marks an unreliable kx
  double period = 0.0;            // psi is only observed modulo 2 pi / spacing
};

/// Weighted phase-gradient estimate of psi along `axis` from hybrid-space
/// S_w * conj(S_r), coil-summed. The per-kx estimate is unwrapped along kx from
/// the most confident sample and shifted by whole periods so that psi is near
/// zero at the first acquired sample.
DirectEstimate estimate_psf_direct(ReferenceScan const &ref, Axis axis, Polarity pol);

/// psi(tau) = offset + sum_m Re(q_m exp(i 2 pi f_m tau)), tau the kx sample time.
struct SparseFreqCoeffs {
  Axis axis = Axis::Y;
  Polarity polarity = Polarity::Positive;
  std::vector<double> freqs; // cycles per ms
  std::vector<cplx> q;
  double offset = 0.0;

  std::vector<double> evaluate(double T_r, Index nx) const;
  /// Real parameter vector [offset, Re q_1, Im q_1, ...].
  std::vector<double> params() const;
  void set_params(std::vector<double> const &p);
};

/// Harmonic basis {m * n_c / T_r}, m = 1..count.
std::vector<double> harmonic_basis(WaveformSpec const &spec, int count);

struct AutoFit {
  SparseFreqCoeffs coeffs;
  std::vector<double> cost; // accepted-step objective history
  int iterations = 0;
};

/// Damped Gauss-Newton fit of the sparse-frequency PSF model.
AutoFit estimate_psf_auto(ReferenceScan const &ref, Axis axis, Polarity pol, double T_r, SparseFreqCoeffs const &init);

/// Linear weighted least-squares fit of the basis to a direct estimate over the
/// central half of kx, with the offset moved by whole periods so the model is
/// near zero at readout start. Used to initialize the auto fit.
SparseFreqCoeffs fit_coeffs_to_direct(DirectEstimate const &d, std::vector<double> const &freqs, Axis axis,
                                      Polarity pol, double T_r);

/// coeffs[axis][polarity] with axis 0 = y, 1 = z.
using CoeffTable = std::array<std::array<SparseFreqCoeffs, 2>, 2>;
PsfSet build_dual_psfs(CoeffTable const &coeffs, double T_r, Index nx);

struct Calibration {
  CoeffTable coeffs;
  std::array<std::array<DirectEstimate, 2>, 2> direct;
  std::array<std::array<AutoFit, 2>, 2> fits;
  PsfSet psfs;
};

/// Direct estimates, their low-|kx| fit as initialization, then the four auto fits.
Calibration calibrate(ReferenceScan const &ref, WaveformSpec const &spec_y, WaveformSpec const &spec_z, int harmonics);

} // namespace wave
