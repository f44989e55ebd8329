#pragma once

#include "wave/grid.hpp"
#include "wave/phantom.hpp"
#include "wave/sampling.hpp"
#include "wave/waveform.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace wave {

/// RF slab encoding: row r weights the n_thin thin slices of every slab.
struct SliderEncoding {
  Index n_rf = 1;
  Index n_thin = 1;
  CVec matrix{cplx(1.0, 0.0)}; // row-major n_rf x n_thin

  cplx at(Index r, Index t) const { return matrix[std::size_t(r * n_thin + t)]; }
  bool is_identity() const;
  double condition() const;
  void validate() const;

  static SliderEncoding identity(Index n = 1);
  /// Unitary n x n DFT matrix.
  static SliderEncoding dft(Index n);
};

/// Unit-modulus image-domain maps, one per (shot, rf); empty means no phase.
struct ShotPhase {
  Index n_shots = 0;
  Index n_rf = 0;
  std::vector<CVec> maps; // index shot * n_rf + rf

  bool empty() const { return maps.empty(); }
  CVec const &get(Index shot, Index rf) const { return maps[std::size_t(shot * n_rf + rf)]; }
};

struct DataBlock {
  Index shot = 0;
  Index rf = 0;
  Polarity polarity = Polarity::Positive;
  std::vector<Index> ky;
  CVec data; // kx + nx * (line + nlines * (group + ngroups * coil))
};

/// Acquired k-space, one block per (shot, rf, polarity) in that nesting order.
struct ShotDataSet {
  Index nx = 0;
  Index ngroups = 0;
  Index ncoils = 0;
  double sigma = 0.0;
  std::vector<DataBlock> blocks;

  Index size() const;
  CVec flatten() const;
  void assign(CVec const &flat);
  bool all_finite() const;
};

struct EncodingContext {
  Grid grid; // thin-slice image grid
  std::shared_ptr<CoilMaps const> coils;
  PsfSet psfs;
  SamplingPattern pattern; // pattern.nz = number of slabs
  SliderEncoding slider;
  ShotPhase phases;
  std::vector<Index> shots; // empty = all shots

  Index nslab() const { return grid.nz / slider.n_thin; }
  std::vector<Index> active_shots() const;
  void validate() const;
  EncodingContext with_shots(std::vector<Index> s) const;
};

/// Grid whose slices are the slabs of `thin`, centered on the slab centers.
Grid slab_grid(Grid const &thin, Index n_thin);

/// Precomputed encoder for one context; encode/adjoint are const and reentrant.
class WaveEncoder {
public:
  explicit WaveEncoder(EncodingContext ctx);

  EncodingContext const &context() const { return ctx_; }
  ShotDataSet zero_data() const;
  ShotDataSet encode(ComplexVolume const &img) const;
  ComplexVolume adjoint(ShotDataSet const &data) const;
  ComplexVolume normal(ComplexVolume const &x) const;

private:
  struct Pass;
  void encode_coil(CVec &w, Index coil, Index rf, std::vector<DataBlock *> const &blocks) const;
  void adjoint_coil(CVec &hyb, Index coil, Index rf, std::vector<DataBlock const *> const &blocks) const;
  void check_data(ShotDataSet const &d) const;

  EncodingContext ctx_;
  std::array<CVec, 2> table_; // exp(-i(psi_y y + psi_z z)) per polarity, image-grid layout
  bool same_psf_ = false;
};

ShotDataSet encode(ComplexVolume const &img, EncodingContext const &ctx);
ComplexVolume adjoint(ShotDataSet const &data, EncodingContext const &ctx);

struct PowerIteration {
  double L;
  std::vector<double> history;
};
/// Largest eigenvalue of A^H A by power iteration from a seeded start.
PowerIteration lipschitz_estimate(WaveEncoder const &enc, int iters, std::uint64_t seed);

} // namespace wave
