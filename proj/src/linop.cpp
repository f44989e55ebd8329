#include "wave/linop.hpp"

#include "wave/error.hpp"
#include "wave/simd/kernels.hpp"

#include <cmath>
#include <random>

namespace wave {

CVec random_cvec(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CVec v(static_cast<std::size_t>(n));
  for (auto &x : v) {
    double const re = nd(rng);
    double const im = nd(rng);
    x = {re, im};
  }
  return v;
}

namespace {
void check_finite(CVec const &v, char const *what) {
  for (auto const &x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw Error(ErrorKind::InvalidArgument, std::string("adjoint_dot_test: non-finite output from ") + what);
}
} // namespace

double adjoint_dot_test(LinearMap const &apply, LinearMap const &apply_adjoint, Index in_size, Index out_size,
                        std::uint64_t seed, int pairs) {
  require(pairs >= 3, "adjoint_dot_test: need at least 3 pairs");
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    CVec const x = random_cvec(in_size, seed + 2 * std::uint64_t(p));
    CVec const y = random_cvec(out_size, seed + 2 * std::uint64_t(p) + 1);
    CVec const ax = apply(x);
    CVec const ahy = apply_adjoint(y);
    check_finite(ax, "forward map");
    check_finite(ahy, "adjoint map");
    require(Index(ax.size()) == out_size && Index(ahy.size()) == in_size, "adjoint_dot_test: shape mismatch");
    cplx const lhs = simd::dot(y, ax);
    cplx const rhs = simd::dot(ahy, x);
    double const denom = std::sqrt(simd::norm2(ax) * simd::norm2(y));
    double const mismatch = denom > 0 ? std::abs(lhs - rhs) / denom : std::abs(lhs - rhs);
    worst = std::max(worst, mismatch);
  }
  return worst;
}

} // namespace wave
