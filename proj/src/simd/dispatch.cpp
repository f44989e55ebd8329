#include "wave/simd/kernels.hpp"

#include "wave/error.hpp"

#include <cstdlib>
#include <string>

namespace wave::simd {

#if defined(WAVE_HAVE_AVX2_TU)
KernelTable const &avx2_kernels();
#endif

KernelTable const *avx2_table() {
#if defined(WAVE_HAVE_AVX2_TU)
  static bool const supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

KernelTable const &active() {
  static KernelTable const *const table = [] {
    char const *env = std::getenv("WAVE_EPI_SIMD");
    std::string const want = env ? env : "";
    if (want == "scalar") return &scalar_table();
    if (auto const *avx = avx2_table()) return avx;
    if (want == "avx2") throw Error(ErrorKind::InvalidArgument, "WAVE_EPI_SIMD=avx2 requested but AVX2/FMA is unavailable");
    return &scalar_table();
  }();
  return *table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
  case Isa::Scalar: return "scalar";
  case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

namespace {
void check(Index a, Index b) { require(a == b, "simd kernel: span length mismatch"); }
} // namespace

void mul(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b) {
  check(Index(out.size()), Index(a.size()));
  check(Index(a.size()), Index(b.size()));
  active().mul(out.data(), a.data(), b.data(), Index(out.size()));
}

void mul_conj(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b) {
  check(Index(out.size()), Index(a.size()));
  check(Index(a.size()), Index(b.size()));
  active().mul_conj(out.data(), a.data(), b.data(), Index(out.size()));
}

void mul_acc(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b) {
  check(Index(out.size()), Index(a.size()));
  check(Index(a.size()), Index(b.size()));
  active().mul_acc(out.data(), a.data(), b.data(), Index(out.size()));
}

void mul_conj_acc(std::span<cplx> out, std::span<cplx const> a, std::span<cplx const> b) {
  check(Index(out.size()), Index(a.size()));
  check(Index(a.size()), Index(b.size()));
  active().mul_conj_acc(out.data(), a.data(), b.data(), Index(out.size()));
}

void axpy(std::span<cplx> out, cplx alpha, std::span<cplx const> x) {
  check(Index(out.size()), Index(x.size()));
  active().axpy(out.data(), alpha, x.data(), Index(out.size()));
}

void scale(std::span<cplx> out, cplx alpha) { active().scale(out.data(), alpha, Index(out.size())); }

cplx dot(std::span<cplx const> a, std::span<cplx const> b) {
  check(Index(a.size()), Index(b.size()));
  return active().dot(a.data(), b.data(), Index(a.size()));
}

double norm2(std::span<cplx const> a) { return active().norm2(a.data(), Index(a.size())); }

} // namespace wave::simd
