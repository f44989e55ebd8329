#include "wave/simd/kernels.hpp"

// Arithmetic is written out on real/imag parts: std::complex operator* goes
// through the Annex G NaN recovery path, which is both slow and not what the
// AVX2 variant computes.

namespace wave::simd {
namespace {

inline double re(cplx const &z) { return z.real(); }
inline double im(cplx const &z) { return z.imag(); }

void mul(cplx *out, cplx const *a, cplx const *b, Index n) {
  for (Index i = 0; i < n; ++i) {
    double const r = re(a[i]) * re(b[i]) - im(a[i]) * im(b[i]);
    double const j = re(a[i]) * im(b[i]) + im(a[i]) * re(b[i]);
    out[i] = {r, j};
  }
}

void mul_conj(cplx *out, cplx const *a, cplx const *b, Index n) {
  for (Index i = 0; i < n; ++i) {
    double const r = re(a[i]) * re(b[i]) + im(a[i]) * im(b[i]);
    double const j = re(a[i]) * im(b[i]) - im(a[i]) * re(b[i]);
    out[i] = {r, j};
  }
}

void mul_acc(cplx *out, cplx const *a, cplx const *b, Index n) {
  for (Index i = 0; i < n; ++i) {
    double const r = re(a[i]) * re(b[i]) - im(a[i]) * im(b[i]);
    double const j = re(a[i]) * im(b[i]) + im(a[i]) * re(b[i]);
    out[i] = {re(out[i]) + r, im(out[i]) + j};
  }
}

void mul_conj_acc(cplx *out, cplx const *a, cplx const *b, Index n) {
  for (Index i = 0; i < n; ++i) {
    double const r = re(a[i]) * re(b[i]) + im(a[i]) * im(b[i]);
    double const j = re(a[i]) * im(b[i]) - im(a[i]) * re(b[i]);
    out[i] = {re(out[i]) + r, im(out[i]) + j};
  }
}

void axpy(cplx *out, cplx alpha, cplx const *x, Index n) {
  double const ar = alpha.real(), ai = alpha.imag();
  for (Index i = 0; i < n; ++i) {
    double const r = ar * re(x[i]) - ai * im(x[i]);
    double const j = ar * im(x[i]) + ai * re(x[i]);
    out[i] = {re(out[i]) + r, im(out[i]) + j};
  }
}

void scale(cplx *out, cplx alpha, Index n) {
  double const ar = alpha.real(), ai = alpha.imag();
  for (Index i = 0; i < n; ++i) {
    double const r = ar * re(out[i]) - ai * im(out[i]);
    double const j = ar * im(out[i]) + ai * re(out[i]);
    out[i] = {r, j};
  }
}

cplx dot(cplx const *a, cplx const *b, Index n) {
  double sr = 0.0, si = 0.0;
  for (Index i = 0; i < n; ++i) {
    sr += re(a[i]) * re(b[i]) + im(a[i]) * im(b[i]);
    si += re(a[i]) * im(b[i]) - im(a[i]) * re(b[i]);
  }
  return {sr, si};
}

double norm2(cplx const *a, Index n) {
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += re(a[i]) * re(a[i]) + im(a[i]) * im(a[i]);
  return s;
}

} // namespace

KernelTable const &scalar_table() {
  static KernelTable const table{Isa::Scalar, mul, mul_conj, mul_acc, mul_conj_acc, axpy, scale, dot, norm2};
  return table;
}

} // namespace wave::simd
