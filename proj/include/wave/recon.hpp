#pragma once

#include "wave/cg.hpp"
#include "wave/forward.hpp"
#include "wave/hankel.hpp"

#include <memory>
#include <vector>

namespace wave {

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 50;
};

struct VolumeSolve {
  ComplexVolume image;
  std::vector<double> residual;
  std::vector<double> cost;
  int iterations = 0;
  bool converged = false;
};

/// CG on the normal equations of the context's encoding. Zero start unless init given.
VolumeSolve sense_cg(ShotDataSet const &data, EncodingContext const &ctx, SolverOptions const &opt,
                     ComplexVolume const *init = nullptr);

/// A^H y scaled by the complex scalar that best fits the data; no phase handling.
ComplexVolume adjoint_combine(ShotDataSet const &data, EncodingContext const &ctx);

/// Blocks for one (shot, rf), relabeled as rf 0, so a single-rf context can encode them.
ShotDataSet select_unit(ShotDataSet const &data, Index shot, Index rf);

struct MultishotResult {
  std::vector<ComplexVolume> images; // unit u = shot * n_rf + rf
  Index n_shots = 0;
  Index n_rf = 0;
  std::vector<double> cost; // data-consistency cost per FISTA iteration
  double lipschitz = 0.0;
};

/// FISTA with the Hankel rank projection as proximal step. `ctx` must have a
/// 1x1 identity slider and no phases; every (shot, rf) block of `data` gets
/// its own image. Shots of the same rf share a Hankel matrix.
MultishotResult multishot_fista(ShotDataSet const &data, EncodingContext const &ctx, LowRankConfig const &cfg,
                                std::uint64_t seed = 1);

/// Unit-modulus Hamming-windowed low-pass phase of each image, per slice.
ShotPhase estimate_shot_phase(std::vector<ComplexVolume> const &images, Index n_shots, Index n_rf,
                              double lowpass_fraction = 0.25);

/// Repeats each slab's phase map over its thin slices.
ShotPhase phase_to_thin(ShotPhase const &slab_phase, Grid const &slab, Grid const &thin);

/// Phase-removed shot average per rf, then slab-wise G^-1 (pseudo-inverse when
/// n_rf != n_thin) onto the thin grid.
ComplexVolume gslider_init(std::vector<ComplexVolume> const &interim, ShotPhase const &phases,
                           SliderEncoding const &slider, Grid const &thin);

/// CG for the joint thin-slice problem from `init`; ctx carries slider and phases.
VolumeSolve gslider_joint_cg(ShotDataSet const &data, EncodingContext const &ctx, SolverOptions const &opt,
                             ComplexVolume const &init);

} // namespace wave

namespace wave {

/// Exact least-squares SENSE solve by dense Cholesky factors of the normal
/// matrix, one per SMS group (groups never mix). Equals the fixed point of
/// sense_cg; meant for small grids where many solves share one operator.
class DenseSense {
public:
  explicit DenseSense(EncodingContext ctx);
  ComplexVolume solve(ShotDataSet const &data) const;
  Index group_unknowns() const { return group_size_; }

private:
  struct Factor;
  WaveEncoder enc_;
  std::vector<std::vector<Index>> voxels_; // per group, ascending
  Index group_size_ = 0;
  std::vector<std::shared_ptr<Factor const>> factors_;
};

} // namespace wave
