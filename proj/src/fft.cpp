#include "wave/fft.hpp"

#include "wave/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace wave {
namespace {

// Plans and twiddles are built once per (shape, axis, direction) and shared.
struct Plan {
  fftw_plan plan = nullptr;
  CVec pre;  // e^{-s i 2 pi c j / n}
  CVec post; // e^{s i 2 pi (c^2 - c k) / n} / sqrt(n)
};

using Key = std::tuple<Index, Index, Index, int, int>;

std::mutex plan_mutex;
std::map<Key, Plan> plans;

Plan const &get_plan(std::array<Index, 3> const &dims, int axis, Direction dir, cplx *data) {
  Key const key{dims[0], dims[1], dims[2], axis, dir == Direction::Forward ? 0 : 1};
  std::lock_guard lock(plan_mutex);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;

  Index const n = dims[axis];
  std::array<Index, 3> stride{1, dims[0], dims[0] * dims[1]};
  fftw_iodim tdim{int(n), int(stride[axis]), int(stride[axis])};
  fftw_iodim howmany[2];
  int nh = 0;
  for (int a = 0; a < 3; ++a) {
    if (a == axis || dims[a] == 1) continue;
    howmany[nh++] = fftw_iodim{int(dims[a]), int(stride[a]), int(stride[a])};
  }
  int const sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
  auto *buf = reinterpret_cast<fftw_complex *>(data);
  Plan p;
  p.plan = fftw_plan_guru_dft(1, &tdim, nh, howmany, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.plan) throw Error(ErrorKind::InvalidArgument, "fftw planning failed");

  double const s = dir == Direction::Forward ? -1.0 : 1.0;
  double const c = static_cast<double>(n / 2);
  double const nn = static_cast<double>(n);
  double const scale = 1.0 / std::sqrt(nn);
  p.pre.resize(static_cast<std::size_t>(n));
  p.post.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    // Reduce the integer products modulo n before scaling to keep the phase exact.
    double const a1 = std::fmod(c * double(j), nn);
    double const a2 = std::fmod(c * c - c * double(j), nn);
    p.pre[std::size_t(j)] = std::polar(1.0, -s * 2.0 * pi * a1 / nn);
    p.post[std::size_t(j)] = std::polar(scale, s * 2.0 * pi * a2 / nn);
  }
  return plans.emplace(key, std::move(p)).first->second;
}

void apply_twiddle(std::span<cplx> data, std::array<Index, 3> const &dims, int axis, CVec const &tw) {
  Index const n0 = dims[0], n1 = dims[1], n2 = dims[2];
  for (Index k = 0; k < n2; ++k)
    for (Index j = 0; j < n1; ++j) {
      cplx *row = data.data() + n0 * (j + n1 * k);
      if (axis == 0) {
        for (Index i = 0; i < n0; ++i) row[i] *= tw[std::size_t(i)];
      } else {
        cplx const w = tw[std::size_t(axis == 1 ? j : k)];
        for (Index i = 0; i < n0; ++i) row[i] *= w;
      }
    }
}

} // namespace

void centered_dft(std::span<cplx> data, std::array<Index, 3> const &dims, int axis, Direction dir) {
  require(axis >= 0 && axis < 3, "centered_dft: axis out of range");
  require(dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1, "centered_dft: dims must be >= 1");
  require(Index(data.size()) == dims[0] * dims[1] * dims[2], "centered_dft: data length mismatch");
  if (dims[axis] == 1) return;
  Plan const &p = get_plan(dims, axis, dir, data.data());
  apply_twiddle(data, dims, axis, p.pre);
  auto *buf = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(p.plan, buf, buf);
  apply_twiddle(data, dims, axis, p.post);
}

void centered_dft_naive(std::span<cplx> data, std::array<Index, 3> const &dims, int axis, Direction dir) {
  Index const n = dims[axis];
  std::array<Index, 3> stride{1, dims[0], dims[0] * dims[1]};
  double const s = dir == Direction::Forward ? -1.0 : 1.0;
  Index const c = n / 2;
  CVec line(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  std::array<Index, 3> other{};
  int const a1 = axis == 0 ? 1 : 0, a2 = axis == 2 ? 1 : 2;
  for (other[a2] = 0; other[a2] < dims[a2]; ++other[a2])
    for (other[a1] = 0; other[a1] < dims[a1]; ++other[a1]) {
      Index const base = other[a1] * stride[a1] + other[a2] * stride[a2];
      for (Index j = 0; j < n; ++j) line[std::size_t(j)] = data[std::size_t(base + j * stride[axis])];
      for (Index k = 0; k < n; ++k) {
        cplx acc = 0;
        for (Index j = 0; j < n; ++j) {
          double const ph = s * 2.0 * pi * double((j - c) * (k - c)) / double(n);
          acc += line[std::size_t(j)] * std::polar(1.0, ph);
        }
        out[std::size_t(k)] = acc / std::sqrt(double(n));
      }
      for (Index k = 0; k < n; ++k) data[std::size_t(base + k * stride[axis])] = out[std::size_t(k)];
    }
}

} // namespace wave
