#include "wave/hankel.hpp"

#include "wave/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace wave {

void LowRankConfig::validate() const {
  require(kernel >= 1, "low-rank kernel must be >= 1");
  require(keep_fraction > 0 && keep_fraction <= 1, "keep_fraction must be in (0, 1]");
  require(fista_iters >= 0 && cg_inner_iters >= 0, "iteration counts must be >= 0");
}

CVec hankel_lift(std::vector<CVec> const &shots, Index nx, Index ny, Index K, HankelInfo &info) {
  require(!shots.empty(), "hankel_lift: no shots");
  require(K <= nx && K <= ny, "hankel_lift: kernel larger than k-space");
  Index const px = nx - K + 1, py = ny - K + 1;
  Index const rows = px * py;
  Index const taps = K * K;
  Index const cols = taps * Index(shots.size());
  info = {rows, cols, 0};
  CVec H(std::size_t(rows * cols));
  for (std::size_t s = 0; s < shots.size(); ++s) {
    require(Index(shots[s].size()) == nx * ny, "hankel_lift: shot size mismatch");
    for (Index dy = 0; dy < K; ++dy)
      for (Index dx = 0; dx < K; ++dx) {
        Index const col = Index(s) * taps + dx + K * dy;
        cplx *out = H.data() + col * rows;
        for (Index y = 0; y < py; ++y)
          for (Index x = 0; x < px; ++x) out[x + px * y] = shots[s][std::size_t((x + dx) + nx * (y + dy))];
      }
  }
  return H;
}

std::vector<CVec> hankel_delift(CVec const &H, Index nshots, Index nx, Index ny, Index K) {
  Index const px = nx - K + 1, py = ny - K + 1;
  Index const rows = px * py;
  Index const taps = K * K;
  std::vector<CVec> out(static_cast<std::size_t>(nshots), CVec(std::size_t(nx * ny), cplx(0, 0)));
  std::vector<double> count(std::size_t(nx * ny), 0.0);
  for (Index dy = 0; dy < K; ++dy)
    for (Index dx = 0; dx < K; ++dx)
      for (Index y = 0; y < py; ++y)
        for (Index x = 0; x < px; ++x) count[std::size_t((x + dx) + nx * (y + dy))] += 1.0;
  for (Index s = 0; s < nshots; ++s)
    for (Index dy = 0; dy < K; ++dy)
      for (Index dx = 0; dx < K; ++dx) {
        cplx const *in = H.data() + (s * taps + dx + K * dy) * rows;
        CVec &o = out[std::size_t(s)];
        for (Index y = 0; y < py; ++y)
          for (Index x = 0; x < px; ++x) o[std::size_t((x + dx) + nx * (y + dy))] += in[x + px * y];
      }
  for (auto &o : out)
    for (std::size_t i = 0; i < o.size(); ++i)
      if (count[i] > 0) o[i] /= count[i];
  return out;
}

HankelInfo hankel_project(std::vector<CVec> &shots, Index nx, Index ny, LowRankConfig const &cfg) {
  cfg.validate();
  HankelInfo info;
  CVec lifted = hankel_lift(shots, nx, ny, cfg.kernel, info);
  Index const k = Index(std::ceil(cfg.keep_fraction * double(std::min(info.rows, info.cols)) - 1e-9));
  info.kept = k;
  bool nonzero = false;
  for (auto const &v : lifted)
    if (v != cplx(0, 0)) {
      nonzero = true;
      break;
    }
  if (!nonzero || k >= std::min(info.rows, info.cols)) return info;

  Eigen::Map<Eigen::MatrixXcd> H(lifted.data(), info.rows, info.cols);
  // Right singular vectors from the Gram matrix; cols (kernel taps x shots) is small.
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(info.cols, info.cols);
  G.selfadjointView<Eigen::Lower>().rankUpdate(H.adjoint());
  G = G.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Divergence, "hankel_project: eigendecomposition failed");
  // Eigenvalues ascend; the last k columns span the dominant row space.
  Eigen::MatrixXcd const V = eig.eigenvectors().rightCols(k);
  Eigen::MatrixXcd const HV = H * V;
  H.noalias() = HV * V.adjoint();
  shots = hankel_delift(lifted, Index(shots.size()), nx, ny, cfg.kernel);
  return info;
}

} // namespace wave
