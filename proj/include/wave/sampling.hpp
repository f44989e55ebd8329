#pragma once

#include "wave/types.hpp"
#include "wave/waveform.hpp"

#include <optional>
#include <vector>

namespace wave {

struct ShotLines {
  std::vector<Index> ky;           // ascending
  std::vector<Polarity> polarity;  // alternates, first line positive
};

/// Per-shot ky selection, polarity tags and SMS grouping of nz slabs into
/// nz / R_sms groups. Group g holds slabs {g + l * ngroups}, l = 0..R_sms-1.
struct SamplingPattern {
  Index ny = 1;
  Index nz = 1;
  Index R_in = 1;
  Index R_sms = 1;
  Index n_shots = 1;
  double partial_fourier = 1.0;
  Index caipi_den = 1;
  std::vector<ShotLines> shots;

  Index ngroups() const { return nz / R_sms; }
  Index group_of(Index slab) const { return slab % ngroups(); }
  Index level_of(Index slab) const { return slab / ngroups(); }
  Index slab_of(Index group, Index level) const { return group + level * ngroups(); }
  /// Phase applied to slab level l at ky: shifts the slab by l * FOV / (R_in * caipi_den)
  /// in y, i.e. a caipi_den fraction of the reduced field of view.
  cplx caipi(Index level, Index ky) const;
  Index total_lines() const;
};

/// Shot s starts at ky offset floor(s * R_in / n_shots) (Spread) or s (Unit).
enum class ShotInterleave { Spread, Unit };

/// caipi_den = 0 selects the default (R_sms).
SamplingPattern make_pattern(Index ny, Index nz, Index R_in, Index R_sms, Index n_shots, double partial_fourier,
                             Index caipi_den = 0, ShotInterleave interleave = ShotInterleave::Spread);

/// Fully sampled single-shot pattern, R=1, no SMS; every line optionally forced
/// to one polarity (reference scans).
SamplingPattern full_pattern(Index ny, Index nz, std::optional<Polarity> force = std::nullopt);

std::pair<std::vector<Index>, std::vector<Index>> split_by_polarity(SamplingPattern const &p, Index shot);

} // namespace wave
