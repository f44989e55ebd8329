#pragma once

// Complex-double inner loops shared by the operators and solvers. Every kernel
// has a scalar reference implementation and, where the CPU supports it, an AVX2
// variant; the variant is picked once at runtime (override with WAVE_EPI_SIMD).

#include "wave/types.hpp"

#include <string_view>

namespace wave::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  // out[i] = a[i] * b[i]
  void (*mul)(cplx *out, cplx const *a, cplx const *b, Index n);
  // out[i] = conj(a[i]) * b[i]
  void (*mul_conj)(cplx *out, cplx const *a, cplx const *b, Index n);
  // out[i] += a[i] * b[i]
  void (*mul_acc)(cplx *out, cplx const *a, cplx const *b, Index n);
  // out[i] += conj(a[i]) * b[i]
  void (*mul_conj_acc)(cplx *out, cplx const *a, cplx const *b, Index n);
  // out[i] += alpha * x[i]
  void (*axpy)(cplx *out, cplx alpha, cplx const *x, Index n);
  // out[i] = alpha * out[i]
  void (*scale)(cplx *out, cplx alpha, Index n);
  // sum conj(a[i]) * b[i]
  cplx (*dot)(cplx const *a, cplx const *b, Index n);
  // sum |a[i]|^2
  double (*norm2)(cplx const *a, Index n);
};

KernelTable const &scalar_table();
/// nullptr when the build or the CPU lacks AVX2+FMA.
KernelTable const *avx2_table();
/// Table selected for this process.
KernelTable const &active();
std::string_view isa_name(Isa isa);

// Span conveniences over the active table.
void mul(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b);
void mul_conj(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b);
void mul_acc(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b);
void mul_conj_acc(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b);
void axpy(std::span<cplx> out, cplx alpha, std::span<cplx const> x);
void scale(std::span<cplx> out, cplx alpha);
cplx dot(std::span<cplx const> a, std::span<cplx const> b);
double norm2(std::span<cplx const> a);

} // namespace wave::simd
