#include "wave/io.hpp"

#include "wave/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace wave {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void io_fail(std::string const &what) { throw Error(ErrorKind::Io, what); }

std::string strip_ext(std::string const &path) {
  for (char const *ext : {".json", ".raw"})
    if (path.size() > std::strlen(ext) && path.compare(path.size() - std::strlen(ext), std::string::npos, ext) == 0)
      return path.substr(0, path.size() - std::strlen(ext));
  return path;
}

template <typename T> void put_le(std::string &out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T> T get_le(char const *p) {
  char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

char const *domain_name(Domain d) { return d == Domain::Image ? "image" : "frequency"; }

} // namespace

Index VolumeFile::count() const {
  Index n = 1;
  for (Index d : dims) n *= d;
  return n;
}

Index VolumeFile::element_bytes() const {
  if (dtype == "complex64") return 8;
  if (dtype == "float32") return 4;
  if (dtype == "complex128") return 16;
  io_fail("unknown dtype '" + dtype + "'");
}

void write_file_atomic(std::string const &path, std::string const &bytes) {
  fs::path const target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::string const tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) io_fail("cannot open " + tmp + " for writing");
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) io_fail("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) io_fail("rename to " + path + " failed: " + ec.message());
}

std::string read_file(std::string const &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) io_fail("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string write_volume_file(std::string const &base_in, VolumeFile const &v) {
  std::string const base = strip_ext(base_in);
  Index const per = v.dtype == "float32" ? 1 : 2;
  if (Index(v.values.size()) != v.count() * per) io_fail("volume value count does not match dims");
  std::string payload;
  payload.reserve(std::size_t(v.count() * v.element_bytes()));
  for (double x : v.values) {
    if (v.dtype == "complex128") put_le<double>(payload, x);
    else put_le<float>(payload, static_cast<float>(x));
  }
  json h;
  h["dims"] = v.dims;
  h["dtype"] = v.dtype;
  h["voxel_mm"] = v.voxel_mm;
  h["axis_order"] = "x-fastest";
  h["endianness"] = "little";
  h["domain"] = {domain_name(v.domain[0]), domain_name(v.domain[1]), domain_name(v.domain[2])};
  h["payload"] = fs::path(base + ".raw").filename().string();
  write_file_atomic(base + ".raw", payload);
  write_file_atomic(base + ".json", h.dump(2) + "\n");
  return base + ".json";
}

VolumeFile read_volume_file(std::string const &path) {
  std::string const base = strip_ext(path);
  json h;
  try {
    h = json::parse(read_file(base + ".json"));
  } catch (json::exception const &e) {
    io_fail("bad volume header " + base + ".json: " + e.what());
  }
  VolumeFile v;
  try {
    v.dims = h.at("dims").get<std::vector<Index>>();
    v.dtype = h.at("dtype").get<std::string>();
    v.voxel_mm = h.at("voxel_mm").get<std::array<double, 3>>();
    if (h.value("endianness", "little") != "little") io_fail("only little-endian payloads are supported");
    if (h.value("axis_order", "x-fastest") != "x-fastest") io_fail("only x-fastest payloads are supported");
    if (h.contains("domain"))
      for (int a = 0; a < 3; ++a) v.domain[a] = h["domain"][a] == "frequency" ? Domain::Frequency : Domain::Image;
  } catch (json::exception const &e) {
    io_fail("bad volume header " + base + ".json: " + e.what());
  }
  std::string const payload = read_file(base + ".raw");
  Index const expected = v.count() * v.element_bytes();
  if (Index(payload.size()) != expected)
    io_fail("payload size mismatch for " + base + ".raw: expected " + std::to_string(expected) + " bytes, got " +
            std::to_string(payload.size()));
  Index const per = v.dtype == "float32" ? 1 : 2;
  v.values.resize(std::size_t(v.count() * per));
  for (std::size_t i = 0; i < v.values.size(); ++i)
    v.values[i] = v.dtype == "complex128" ? get_le<double>(payload.data() + 8 * i)
                                          : double(get_le<float>(payload.data() + 4 * i));
  return v;
}

VolumeFile to_volume_file(ComplexVolume const &vol, std::string const &dtype) {
  VolumeFile v;
  v.dims = {vol.grid.nx, vol.grid.ny, vol.grid.nz};
  v.dtype = dtype;
  v.voxel_mm = {vol.grid.dx, vol.grid.dy, vol.grid.dz};
  v.domain = vol.domain;
  v.values.reserve(vol.data.size() * 2);
  for (auto const &c : vol.data) {
    v.values.push_back(c.real());
    v.values.push_back(c.imag());
  }
  return v;
}

VolumeFile to_volume_file(Grid const &g, std::vector<double> const &real_values) {
  require(Index(real_values.size()) == g.size(), "to_volume_file: value count mismatch");
  VolumeFile v;
  v.dims = {g.nx, g.ny, g.nz};
  v.dtype = "float32";
  v.voxel_mm = {g.dx, g.dy, g.dz};
  v.values = real_values;
  return v;
}

ComplexVolume to_complex_volume(VolumeFile const &f) {
  if (f.dtype == "float32") io_fail("to_complex_volume: real payload");
  if (f.dims.size() != 3) io_fail("to_complex_volume: expected 3 dims");
  Grid g{f.dims[0], f.dims[1], f.dims[2], f.voxel_mm[0], f.voxel_mm[1], f.voxel_mm[2]};
  CVec d(std::size_t(g.size()));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = {f.values[2 * i], f.values[2 * i + 1]};
  ComplexVolume v(g, std::move(d));
  v.domain = f.domain;
  return v;
}

void write_pgm_real(std::string const &path, Index nx, Index ny, std::vector<double> const &values) {
  require(Index(values.size()) == nx * ny, "write_pgm: size mismatch");
  double lo = values.empty() ? 0 : values[0], hi = lo;
  for (double x : values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  // Row 0 of the image is the largest y so anterior is up.
  for (Index y = ny - 1; y >= 0; --y)
    for (Index x = 0; x < nx; ++x) {
      double const t = hi > lo ? (values[std::size_t(x + nx * y)] - lo) / (hi - lo) : 0.0;
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
    }
  write_file_atomic(path, out);
  json w{{"min", lo}, {"max", hi}, {"quantity", "magnitude"}};
  write_file_atomic(path + ".window.json", w.dump(2) + "\n");
}

void write_pgm_slice(std::string const &path, ComplexVolume const &v, Index z) {
  require(z >= 0 && z < v.grid.nz, "write_pgm_slice: slice out of range");
  Index const plane = v.grid.nx * v.grid.ny;
  std::vector<double> mag(static_cast<std::size_t>(plane));
  for (Index i = 0; i < plane; ++i) mag[std::size_t(i)] = std::abs(v.data[std::size_t(z * plane + i)]);
  write_pgm_real(path, v.grid.nx, v.grid.ny, mag);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add(std::vector<std::string> row) {
  require(row.size() == header_.size(), "CsvTable: row width mismatch");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](std::vector<std::string> const &r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += r[i];
    }
    out += '\n';
  };
  line(header_);
  for (auto const &r : rows_) line(r);
  return out;
}

} // namespace wave
