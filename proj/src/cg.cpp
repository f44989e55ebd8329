#include "wave/cg.hpp"

#include "wave/error.hpp"
#include "wave/simd/kernels.hpp"

#include <cmath>

namespace wave {

CgResult conjugate_gradient(std::function<CVec(CVec const &)> const &normal, CVec const &rhs, CVec x0, double cost0,
                            double tol, int max_iters) {
  require(tol > 0 && max_iters >= 0, "conjugate_gradient: bad tolerance or iteration count");
  CgResult out;
  Index const n = Index(rhs.size());
  bool const warm = !x0.empty();
  out.x = !warm ? CVec(static_cast<std::size_t>(n), cplx(0, 0)) : std::move(x0);
  require(Index(out.x.size()) == n, "conjugate_gradient: initial guess size mismatch");

  double const bnorm = std::sqrt(simd::norm2(rhs));
  CVec r = rhs;
  if (warm) {
    CVec const mx = normal(out.x);
    simd::axpy(r, -1.0, mx);
  }
  CVec p = r;
  double rho = simd::norm2(r);
  double cost = cost0;
  out.cost.push_back(cost);
  out.residual.push_back(bnorm > 0 ? std::sqrt(rho) / bnorm : 0.0);
  if (bnorm == 0.0 || out.residual.back() < tol) {
    out.converged = true;
    return out;
  }
  for (int k = 0; k < max_iters; ++k) {
    CVec const q = normal(p);
    double const pq = simd::dot(p, q).real();
    if (!std::isfinite(pq)) throw Error(ErrorKind::Divergence, "conjugate_gradient: non-finite curvature", out.residual);
    if (pq <= 0.0) break;
    double const alpha = rho / pq;
    simd::axpy(out.x, alpha, p);
    simd::axpy(r, -alpha, q);
    double const rho_new = simd::norm2(r);
    cost -= alpha * rho;
    out.iterations = k + 1;
    out.cost.push_back(cost);
    out.residual.push_back(std::sqrt(rho_new) / bnorm);
    if (!std::isfinite(rho_new)) throw Error(ErrorKind::Divergence, "conjugate_gradient: non-finite residual", out.residual);
    if (out.residual.back() < tol) {
      out.converged = true;
      break;
    }
    double const beta = rho_new / rho;
    rho = rho_new;
    simd::scale(p, beta);
    simd::axpy(p, 1.0, r);
  }
  return out;
}

} // namespace wave
