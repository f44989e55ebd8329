#pragma once

#include "wave/types.hpp"

#include <vector>

namespace wave {

struct LowRankConfig {
  Index kernel = 7;
  double keep_fraction = 0.375;
  int fista_iters = 50;
  int cg_inner_iters = 10;

  void validate() const;
};

struct HankelInfo {
  Index rows = 0;
  Index cols = 0;
  Index kept = 0;
};

/// Block-Hankel lifting of per-shot 2D k-spaces (nx x ny, x fastest): one row
/// per kernel position, columns are kernel taps with shots concatenated.
/// Column-major rows x cols.
CVec hankel_lift(std::vector<CVec> const &shots, Index nx, Index ny, Index kernel, HankelInfo &info);

/// Moore-Penrose inverse of the lifting: averages the copies of each entry.
std::vector<CVec> hankel_delift(CVec const &lifted, Index nshots, Index nx, Index ny, Index kernel);

/// Rank projection in the lifted domain followed by de-lifting. Keeps
/// ceil(keep_fraction * min(rows, cols)) singular values. All-zero input is
/// returned unchanged.
HankelInfo hankel_project(std::vector<CVec> &shots, Index nx, Index ny, LowRankConfig const &cfg);

} // namespace wave
