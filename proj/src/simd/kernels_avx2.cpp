#include "wave/simd/kernels.hpp"

#include <immintrin.h>

// Two complex doubles per 256-bit register, interleaved [re0 im0 re1 im1].

namespace wave::simd {
namespace {

inline __m256d load(cplx const *p) { return _mm256_loadu_pd(reinterpret_cast<double const *>(p)); }
inline void store(cplx *p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double *>(p), v); }

// a * b
inline __m256d cmul(__m256d a, __m256d b) {
  __m256d const b_re = _mm256_movedup_pd(b);
  __m256d const b_im = _mm256_permute_pd(b, 0xF);
  __m256d const a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

// conj(a) * b
inline __m256d cmul_conj(__m256d a, __m256d b) {
  __m256d const a_re = _mm256_movedup_pd(a);
  __m256d const a_im = _mm256_permute_pd(a, 0xF);
  __m256d const b_sw = _mm256_permute_pd(b, 0x5);
  return _mm256_fmsubadd_pd(b, a_re, _mm256_mul_pd(b_sw, a_im));
}

inline cplx tail_mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline cplx tail_mul_conj(cplx a, cplx b) {
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

void mul(cplx *out, cplx const *a, cplx const *b, Index n) {
  Index i = 0;
  for (; i + 2 <= n; i += 2) store(out + i, cmul(load(a + i), load(b + i)));
  for (; i < n; ++i) out[i] = tail_mul(a[i], b[i]);
}

void mul_conj(cplx *out, cplx const *a, cplx const *b, Index n) {
  Index i = 0;
  for (; i + 2 <= n; i += 2) store(out + i, cmul_conj(load(a + i), load(b + i)));
  for (; i < n; ++i) out[i] = tail_mul_conj(a[i], b[i]);
}

void mul_acc(cplx *out, cplx const *a, cplx const *b, Index n) {
  Index i = 0;
  for (; i + 2 <= n; i += 2) store(out + i, _mm256_add_pd(load(out + i), cmul(load(a + i), load(b + i))));
  for (; i < n; ++i) out[i] += tail_mul(a[i], b[i]);
}

void mul_conj_acc(cplx *out, cplx const *a, cplx const *b, Index n) {
  Index i = 0;
  for (; i + 2 <= n; i += 2) store(out + i, _mm256_add_pd(load(out + i), cmul_conj(load(a + i), load(b + i))));
  for (; i < n; ++i) out[i] += tail_mul_conj(a[i], b[i]);
}

void axpy(cplx *out, cplx alpha, cplx const *x, Index n) {
  __m256d const ar = _mm256_set1_pd(alpha.real());
  __m256d const ai = _mm256_set1_pd(alpha.imag());
  Index i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const v = load(x + i);
    __m256d const prod = _mm256_fmaddsub_pd(v, ar, _mm256_mul_pd(_mm256_permute_pd(v, 0x5), ai));
    store(out + i, _mm256_add_pd(load(out + i), prod));
  }
  for (; i < n; ++i) out[i] += tail_mul(alpha, x[i]);
}

void scale(cplx *out, cplx alpha, Index n) {
  __m256d const ar = _mm256_set1_pd(alpha.real());
  __m256d const ai = _mm256_set1_pd(alpha.imag());
  Index i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const v = load(out + i);
    store(out + i, _mm256_fmaddsub_pd(v, ar, _mm256_mul_pd(_mm256_permute_pd(v, 0x5), ai)));
  }
  for (; i < n; ++i) out[i] = tail_mul(alpha, out[i]);
}

inline double hsum(__m256d v) {
  __m128d const lo = _mm256_castpd256_pd128(v);
  __m128d const hi = _mm256_extractf128_pd(v, 1);
  __m128d const s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cplx dot(cplx const *a, cplx const *b, Index n) {
  // acc_direct lanes: [br*ar, bi*ar], acc_cross lanes: [bi*ai, br*ai]
  __m256d acc_direct = _mm256_setzero_pd();
  __m256d acc_cross = _mm256_setzero_pd();
  Index i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d const va = load(a + i);
    __m256d const vb = load(b + i);
    acc_direct = _mm256_fmadd_pd(vb, _mm256_movedup_pd(va), acc_direct);
    acc_cross = _mm256_fmadd_pd(_mm256_permute_pd(vb, 0x5), _mm256_permute_pd(va, 0xF), acc_cross);
  }
  alignas(32) double d[4], c[4];
  _mm256_store_pd(d, acc_direct);
  _mm256_store_pd(c, acc_cross);
  double sr = (d[0] + c[0]) + (d[2] + c[2]);
  double si = (d[1] - c[1]) + (d[3] - c[3]);
  for (; i < n; ++i) {
    cplx const t = tail_mul_conj(a[i], b[i]);
    sr += t.real();
    si += t.imag();
  }
  return {sr, si};
}

double norm2(cplx const *a, Index n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  Index i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d const v0 = load(a + i);
    __m256d const v1 = load(a + i + 2);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 2 <= n; i += 2) {
    __m256d const v = load(a + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::norm(a[i]);
  return s;
}

} // namespace

KernelTable const &avx2_kernels() {
  static KernelTable const table{Isa::Avx2, mul, mul_conj, mul_acc, mul_conj_acc, axpy, scale, dot, norm2};
  return table;
}

} // namespace wave::simd
