#include "wave/sampling.hpp"

#include "wave/error.hpp"

#include <cmath>

namespace wave {

cplx SamplingPattern::caipi(Index level, Index ky) const {
  if (level == 0 || caipi_den <= 1) return {1.0, 0.0};
  // Blips step once per acquired line, so the ramp period is R_in * caipi_den
  // in full-grid ky. Reduce the integer product before scaling.
  Index const period = R_in * caipi_den;
  Index const m = ((level * (ky - ny / 2)) % period + period) % period;
  return std::polar(1.0, -2.0 * pi * double(m) / double(period));
}

Index SamplingPattern::total_lines() const {
  Index n = 0;
  for (auto const &s : shots) n += Index(s.ky.size());
  return n;
}

namespace {
bool allowed_pf(double pf) {
  for (double v : {1.0, 7.0 / 8.0, 6.0 / 8.0})
    if (std::abs(pf - v) < 1e-9) return true;
  return false;
}
} // namespace

SamplingPattern make_pattern(Index ny, Index nz, Index R_in, Index R_sms, Index n_shots, double pf, Index caipi_den,
                             ShotInterleave interleave) {
  require(ny >= 1 && nz >= 1, "make_pattern: ny and nz must be >= 1");
  require(R_in >= 1, "make_pattern: R_in must be >= 1");
  require(R_sms >= 1 && nz % R_sms == 0, "make_pattern: R_sms must divide nz");
  require(n_shots >= 1, "make_pattern: n_shots must be >= 1");
  require(allowed_pf(pf), "make_pattern: partial Fourier must be 1, 7/8 or 6/8");
  require(caipi_den >= 0, "make_pattern: caipi denominator must be >= 0");

  SamplingPattern p;
  p.ny = ny;
  p.nz = nz;
  p.R_in = R_in;
  p.R_sms = R_sms;
  p.n_shots = n_shots;
  p.partial_fourier = pf;
  p.caipi_den = caipi_den == 0 ? R_sms : caipi_den;

  require(n_shots <= R_in, "make_pattern: shot offsets are not distinct modulo R_in");
  auto const offset = [&](Index s) {
    if (interleave == ShotInterleave::Unit && R_in % n_shots != 0) return s;
    return s * R_in / n_shots;
  };
  Index const k0 = (ny / 2) % R_in;
  Index const cut = ny - Index(std::llround((1.0 - pf) * double(ny)));
  for (Index s = 0; s < n_shots; ++s) {
    ShotLines sl;
    for (Index ky = k0 + offset(s); ky < cut; ky += R_in) {
      sl.ky.push_back(ky);
      sl.polarity.push_back(sl.ky.size() % 2 == 1 ? Polarity::Positive : Polarity::Negative);
    }
    p.shots.push_back(std::move(sl));
  }
  return p;
}

SamplingPattern full_pattern(Index ny, Index nz, std::optional<Polarity> force) {
  SamplingPattern p = make_pattern(ny, nz, 1, 1, 1, 1.0, 1);
  if (force)
    for (auto &pol : p.shots[0].polarity) pol = *force;
  return p;
}

std::pair<std::vector<Index>, std::vector<Index>> split_by_polarity(SamplingPattern const &p, Index shot) {
  require(shot >= 0 && shot < p.n_shots, "split_by_polarity: shot out of range");
  std::pair<std::vector<Index>, std::vector<Index>> out;
  auto const &s = p.shots[std::size_t(shot)];
  for (std::size_t i = 0; i < s.ky.size(); ++i)
    (s.polarity[i] == Polarity::Positive ? out.first : out.second).push_back(s.ky[i]);
  return out;
}

} // namespace wave
