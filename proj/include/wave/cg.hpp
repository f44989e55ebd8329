#pragma once

#include "wave/types.hpp"

#include <functional>
#include <vector>

namespace wave {

struct CgResult {
  CVec x;
  std::vector<double> residual; // |r_k| / |rhs|, k = 0..iterations
  std::vector<double> cost;     // data term |A x_k - d|^2
  int iterations = 0;
  bool converged = false;
};

/// Conjugate gradient on M x = rhs for Hermitian positive semidefinite M = A^H A.
/// x0 empty means zero start. cost0 = |A x0 - d|^2 seeds the cost history,
/// which then follows cost_{k+1} = cost_k - alpha_k |r_k|^2.
CgResult conjugate_gradient(std::function<CVec(CVec const &)> const &normal, CVec const &rhs, CVec x0, double cost0,
                            double tol, int max_iters);

} // namespace wave
