#include "support.hpp"

#include "wave/error.hpp"
#include "wave/fft.hpp"
#include "wave/simd/kernels.hpp"

#include <catch_amalgamated.hpp>

using namespace wave;

TEST_CASE("grid coordinates put index floor(n/2) at the offset", "[grid]") {
  Grid g = test::make_grid(5, 4, 3, 2.0, 7.0);
  g.offset = {1.0, -2.0, 3.0};
  CHECK(g.coord(Axis::X, 2) == 1.0);
  CHECK(g.coord(Axis::X, 0) == -3.0);
  CHECK(g.coord(Axis::Y, 2) == -2.0);
  CHECK(g.coord(Axis::Z, 0) == 3.0 - 7.0);
  CHECK(g.index(1, 2, 1) == 1 + 5 * (2 + 4 * 1));
  Grid bad = g;
  bad.nx = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("centered DFT matches the O(n^2) definition", "[fft]") {
  for (auto dims : {std::array<Index, 3>{8, 6, 3}, std::array<Index, 3>{7, 5, 2}, std::array<Index, 3>{1, 9, 4}}) {
    for (int axis = 0; axis < 3; ++axis)
      for (auto dir : {Direction::Forward, Direction::Inverse}) {
        CVec a = random_cvec(dims[0] * dims[1] * dims[2], 17 + axis);
        CVec b = a;
        centered_dft(a, dims, axis, dir);
        centered_dft_naive(b, dims, axis, dir);
        CHECK(test::max_abs_diff(a, b) < 1e-12);
      }
  }
}

TEST_CASE("centered DFT is unitary and puts DC at floor(n/2)", "[fft]") {
  std::array<Index, 3> const dims{16, 12, 3};
  CVec const x = random_cvec(16 * 12 * 3, 3);
  CVec y = x;
  centered_dft(y, dims, 0, Direction::Forward);
  centered_dft(y, dims, 1, Direction::Forward);
  CHECK(std::abs(test::norm2(y) - test::norm2(x)) / test::norm2(x) < 1e-12);
  centered_dft(y, dims, 1, Direction::Inverse);
  centered_dft(y, dims, 0, Direction::Inverse);
  CHECK(test::max_abs_diff(x, y) < 1e-12);

  CVec ones(std::size_t(9), cplx(1.0, 0.0));
  centered_dft(ones, {9, 1, 1}, 0, Direction::Forward);
  CHECK(std::abs(ones[4] - cplx(3.0, 0.0)) < 1e-12);
  for (std::size_t k = 0; k < 9; ++k)
    if (k != 4) CHECK(std::abs(ones[k]) < 1e-12);
}

TEST_CASE("dft_axis tracks domain tags", "[fft]") {
  ComplexVolume v = test::random_volume(test::make_grid(8, 8, 2), 5);
  ComplexVolume k = dft_axis(v, Axis::X, Direction::Forward);
  CHECK(k.domain[0] == Domain::Frequency);
  CHECK_THROWS_AS(dft_axis(k, Axis::X, Direction::Forward), Error);
  ComplexVolume back = dft_axis(k, Axis::X, Direction::Inverse);
  CHECK(test::max_abs_diff(back.data, v.data) < 1e-12);
}

namespace {

using KernelFn = void (*)(cplx *, cplx const *, cplx const *, Index);

void compare_binary(KernelFn scalar, KernelFn vec, bool accumulate) {
  for (Index n : {0, 1, 2, 3, 5, 8, 17, 64, 101}) {
    CVec const a = random_cvec(n, 100 + n), b = random_cvec(n, 200 + n);
    CVec o1 = accumulate ? random_cvec(n, 300 + n) : CVec(std::size_t(n));
    CVec o2 = o1;
    scalar(o1.data(), a.data(), b.data(), n);
    vec(o2.data(), a.data(), b.data(), n);
    for (Index i = 0; i < n; ++i) CHECK(std::abs(o1[std::size_t(i)] - o2[std::size_t(i)]) < 1e-14);
  }
}

} // namespace

TEST_CASE("AVX2 kernels agree with the scalar reference", "[simd]") {
  auto const *avx = simd::avx2_table();
  if (!avx) SKIP("AVX2/FMA not available on this machine");
  auto const &sc = simd::scalar_table();
  compare_binary(sc.mul, avx->mul, false);
  compare_binary(sc.mul_conj, avx->mul_conj, false);
  compare_binary(sc.mul_acc, avx->mul_acc, true);
  compare_binary(sc.mul_conj_acc, avx->mul_conj_acc, true);
  cplx const alpha(0.3, -1.7);
  for (Index n : {0, 1, 3, 4, 9, 33}) {
    CVec const x = random_cvec(n, 7 + n);
    CVec o1 = random_cvec(n, 8 + n), o2 = o1;
    sc.axpy(o1.data(), alpha, x.data(), n);
    avx->axpy(o2.data(), alpha, x.data(), n);
    CHECK(test::max_abs_diff(o1, o2) < 1e-14);
    sc.scale(o1.data(), alpha, n);
    avx->scale(o2.data(), alpha, n);
    CHECK(test::max_abs_diff(o1, o2) < 1e-14);
    CHECK(std::abs(sc.dot(o1.data(), x.data(), n) - avx->dot(o1.data(), x.data(), n)) < 1e-12);
    CHECK(std::abs(sc.norm2(x.data(), n) - avx->norm2(x.data(), n)) < 1e-12);
  }
}

TEST_CASE("span wrappers reject mismatched lengths", "[simd]") {
  CVec a(3), b(4), o(3);
  CHECK_THROWS_AS(simd::mul(o, a, b), Error);
  CHECK(simd::isa_name(simd::scalar_table().isa) == "scalar");
}
