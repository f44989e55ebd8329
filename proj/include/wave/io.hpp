#pragma once

#include "wave/grid.hpp"

#include <array>
#include <string>
#include <vector>

namespace wave {

/// JSON header (`<base>.json`) plus raw little-endian payload (`<base>.raw`),
/// x fastest. dtype is complex64, float32, or complex128 for k-space data.
struct VolumeFile {
  std::vector<Index> dims;
  std::string dtype = "complex64";
  std::array<double, 3> voxel_mm{1, 1, 1};
  std::array<Domain, 3> domain{Domain::Image, Domain::Image, Domain::Image};
  std::vector<double> values; // interleaved re/im for complex dtypes

  Index count() const;
  Index element_bytes() const;
};

/// Writes `<base>.json` and `<base>.raw` atomically; returns the header path.
std::string write_volume_file(std::string const &base, VolumeFile const &v);
/// Accepts the header path or the base path.
VolumeFile read_volume_file(std::string const &path);

VolumeFile to_volume_file(ComplexVolume const &v, std::string const &dtype = "complex64");
VolumeFile to_volume_file(Grid const &g, std::vector<double> const &real_values);
ComplexVolume to_complex_volume(VolumeFile const &f);

/// Writes the bytes to a temporary sibling and renames it into place.
void write_file_atomic(std::string const &path, std::string const &bytes);
std::string read_file(std::string const &path);

/// 8-bit PGM of |slice z| windowed to [min, max]; the window goes to `<path>.window.json`.
void write_pgm_slice(std::string const &path, ComplexVolume const &v, Index z);
void write_pgm_real(std::string const &path, Index nx, Index ny, std::vector<double> const &values);

/// Fixed-format CSV writer (17 significant digits) for deterministic output.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::string str() const;
  void write(std::string const &path) const { write_file_atomic(path, str()); }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double v);

} // namespace wave
