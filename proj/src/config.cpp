#include "wave/config.hpp"

#include "wave/error.hpp"

#include <cmath>

namespace wave {

using nlohmann::json;

char const *to_string(ReconMode m) noexcept {
  switch (m) {
  case ReconMode::Sense: return "sense";
  case ReconMode::Multishot: return "multishot";
  case ReconMode::GsliderJoint: return "gslider_joint";
  }
  return "?";
}

namespace {

[[noreturn]] void bad(std::string const &what) { throw Error(ErrorKind::InvalidConfig, what); }

// Keys whose values are free-form and are not merged key by key.
bool opaque(std::string const &path) {
  return path == "phantom.ellipsoids" || path == "slider.matrix" || path == "analysis.gfactor_methods" ||
         path == "wave.imperfection.delay_ms" || path == "wave.imperfection.scale" || path == "phantom.phase_linear" ||
         path == "phantom.phase_quadratic";
}

void merge(json &base, json const &user, std::string const &path) {
  if (!user.is_object()) bad("config section '" + path + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string const key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) bad("unknown config key '" + key + "'");
    json &slot = base[it.key()];
    if (slot.is_object() && !opaque(key)) merge(slot, it.value(), key);
    else slot = it.value();
  }
}

template <typename T> T get(json const &j, char const *section, char const *key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (json::exception const &) {
    bad(std::string("config key '") + section + "." + key + "' has the wrong type");
  }
}

WaveShape shape_of(std::string const &s, std::string const &key) {
  if (s == "cosine") return WaveShape::Cosine;
  if (s == "sine") return WaveShape::Sine;
  bad("config key '" + key + "' must be \"cosine\" or \"sine\"");
}

} // namespace

double readout_gradient(double dx_mm, double T_r_ms) { return 2.0 * pi / (dx_mm * kGammaMm * T_r_ms); }

json default_config_json() {
  return json::parse(R"({
  "grid": {"nx": 64, "ny": 64, "nz": 6, "fov_x_mm": 220.0, "fov_y_mm": 220.0, "dz_mm": 20.0},
  "phantom": {"preset": "head", "ellipsoids": [], "phase_const": 0.0,
              "phase_linear": [0.0, 0.0, 0.0], "phase_quadratic": [0.0, 0.0, 0.0]},
  "coils": {"ncoils": 16, "ring_radius_mm": 120.0, "lobe_width_mm": 60.0, "z_offset_mm": 50.0, "z_rows": 2,
            "phase_slope": 0.02, "seed": 7, "uniform": false},
  "wave": {"G_w_y": 30.0, "G_w_z": 15.0, "n_c_y": 0.5, "n_c_z": 1.0, "shape_y": "cosine", "shape_z": "sine",
           "T_r": 0.2175, "G_x": 0.0, "R_max": 495.0,
           "imperfection": {"delay_ms": [0.0, 0.0], "scale": [1.0, 1.0]}},
  "calibration": {"ref_ky_fraction": 1.0, "ref_snr": 0.0, "harmonics": 2, "seed": 11},
  "sampling": {"R_in": 3, "R_sms": 3, "n_shots": 1, "pf": 1.0, "caipi": 0,
               "shot_phase_rad": 0.0, "shot_phase_cycles": 2, "shot_phase_seed": 5,
               "shot_interleave": "spread"},
  "slider": {"n_rf": 1, "matrix": "identity"},
  "recon": {"mode": "sense", "psf": "true", "tol": 1e-6, "max_iters": 50, "lowpass_fraction": 0.25,
            "lowrank": {"kernel": 7, "keep_fraction": 0.375, "fista_iters": 50, "cg_inner_iters": 10}},
  "analysis": {"snr": 0.0, "seed": 1234, "replicas": 200, "gfactor_tol": 1e-4, "gfactor_max_iters": 100,
               "gfactor_methods": ["blipped", "wave"], "gfactor_solver": "auto"},
  "psf_analysis": {"G_w_y": 22.0, "G_w_z": 19.0, "T_r": 0.66, "nx": 220, "dx_mm": 1.0, "n_thin": 5,
                   "thin_mm": 1.0, "sub_per_thin": 8, "dwell_super": 8},
  "io": {"output_dir": "out"}
})");
}

json resolve_config(json const &user) {
  json doc = default_config_json();
  if (!user.is_null()) merge(doc, user, "");
  return doc;
}

void apply_override(json &doc, std::string const &assignment) {
  auto const eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("override '" + assignment + "' must look like key=value");
  std::string const key = assignment.substr(0, eq);
  std::string const raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (json::exception const &) {
    value = raw;
  }
  json *node = &doc;
  std::size_t start = 0;
  while (true) {
    auto const dot = key.find('.', start);
    std::string const part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) bad("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // String-valued keys take the raw text, so "true" stays a PSF source name.
  *node = node->is_string() ? json(raw) : value;
}

ExperimentConfig parse_config(json const &j) {
  ExperimentConfig c;
  try {
    // grid
    Index const nx = get<Index>(j, "grid", "nx"), ny = get<Index>(j, "grid", "ny"), nz = get<Index>(j, "grid", "nz");
    if (nx < 2 || ny < 2 || nz < 1) bad("grid dims must be nx, ny >= 2 and nz >= 1");
    double const fx = get<double>(j, "grid", "fov_x_mm"), fy = get<double>(j, "grid", "fov_y_mm");
    double const dz = get<double>(j, "grid", "dz_mm");
    if (fx <= 0 || fy <= 0 || dz <= 0) bad("grid FOV and dz must be > 0");
    c.grid = Grid{nx, ny, nz, fx / double(nx), fy / double(ny), dz};

    // phantom
    auto const &ph = j.at("phantom");
    std::string const preset = ph.at("preset").get<std::string>();
    if (preset == "head") c.phantom = default_phantom_spec();
    else if (preset != "custom") bad("phantom.preset must be \"head\" or \"custom\"");
    for (auto const &e : ph.at("ellipsoids")) {
      Ellipsoid el;
      el.center = e.at("center").get<std::array<double, 3>>();
      el.semi = e.at("semi").get<std::array<double, 3>>();
      auto const amp = e.at("amplitude");
      el.amplitude = amp.is_array() ? cplx(amp.at(0).get<double>(), amp.at(1).get<double>()) : cplx(amp.get<double>(), 0);
      c.phantom.ellipsoids.push_back(el);
    }
    c.phantom.phase_const = ph.at("phase_const").get<double>();
    c.phantom.phase_linear = ph.at("phase_linear").get<std::array<double, 3>>();
    c.phantom.phase_quadratic = ph.at("phase_quadratic").get<std::array<double, 3>>();
    c.phantom.validate();

    // coils
    c.coils.ncoils = get<Index>(j, "coils", "ncoils");
    c.coils.ring_radius_mm = get<double>(j, "coils", "ring_radius_mm");
    c.coils.lobe_width_mm = get<double>(j, "coils", "lobe_width_mm");
    c.coils.z_offset_mm = get<double>(j, "coils", "z_offset_mm");
    c.coils.z_rows = get<Index>(j, "coils", "z_rows");
    c.coils.phase_slope = get<double>(j, "coils", "phase_slope");
    c.coils.seed = get<std::uint64_t>(j, "coils", "seed");
    c.uniform_coils = get<bool>(j, "coils", "uniform");
    if (c.coils.ncoils < 1) bad("coils.ncoils must be >= 1");
    if (c.coils.lobe_width_mm <= 0) bad("coils.lobe_width_mm must be > 0");

    // wave
    double const T_r = get<double>(j, "wave", "T_r");
    if (T_r <= 0) bad("wave.T_r must be > 0");
    double G_x = get<double>(j, "wave", "G_x");
    if (G_x < 0) bad("wave.G_x must be >= 0 (0 derives it from dx and T_r)");
    if (G_x == 0) G_x = readout_gradient(c.grid.dx, T_r);
    double const R_max = get<double>(j, "wave", "R_max");
    c.wave_y = {Axis::Y, shape_of(get<std::string>(j, "wave", "shape_y"), "wave.shape_y"), get<double>(j, "wave", "G_w_y"),
                get<double>(j, "wave", "n_c_y"), T_r, G_x, R_max};
    c.wave_z = {Axis::Z, shape_of(get<std::string>(j, "wave", "shape_z"), "wave.shape_z"), get<double>(j, "wave", "G_w_z"),
                get<double>(j, "wave", "n_c_z"), T_r, G_x, R_max};
    try {
      c.wave_y.validate();
      c.wave_z.validate();
    } catch (Error const &e) {
      bad(std::string("wave: ") + e.what());
    }
    auto const &imp = j.at("wave").at("imperfection");
    c.imperfection.delay_ms = imp.at("delay_ms").get<std::array<double, 2>>();
    c.imperfection.scale = imp.at("scale").get<std::array<double, 2>>();

    // calibration
    c.ref_ky_fraction = get<double>(j, "calibration", "ref_ky_fraction");
    c.ref_snr = get<double>(j, "calibration", "ref_snr");
    c.harmonics = get<int>(j, "calibration", "harmonics");
    c.ref_seed = get<std::uint64_t>(j, "calibration", "seed");
    if (c.ref_ky_fraction <= 0 || c.ref_ky_fraction > 1) bad("calibration.ref_ky_fraction must be in (0, 1]");
    if (c.harmonics < 1) bad("calibration.harmonics must be >= 1");
    if (c.ref_snr < 0) bad("calibration.ref_snr must be >= 0");

    // sampling
    c.R_in = get<Index>(j, "sampling", "R_in");
    c.R_sms = get<Index>(j, "sampling", "R_sms");
    c.n_shots = get<Index>(j, "sampling", "n_shots");
    c.partial_fourier = get<double>(j, "sampling", "pf");
    c.caipi_den = get<Index>(j, "sampling", "caipi");
    c.shot_phase_rad = get<double>(j, "sampling", "shot_phase_rad");
    c.shot_phase_cycles = get<int>(j, "sampling", "shot_phase_cycles");
    c.shot_phase_seed = get<std::uint64_t>(j, "sampling", "shot_phase_seed");
    auto const interleave = get<std::string>(j, "sampling", "shot_interleave");
    if (interleave == "spread") c.shot_interleave = ShotInterleave::Spread;
    else if (interleave == "unit") c.shot_interleave = ShotInterleave::Unit;
    else bad("sampling.shot_interleave must be spread or unit");
    if (c.R_in < 1 || c.R_sms < 1 || c.n_shots < 1) bad("sampling factors must be >= 1");
    if (c.n_shots > c.R_in) bad("sampling.n_shots must be <= sampling.R_in");
    if (c.caipi_den < 0) bad("sampling.caipi must be >= 0");

    // slider
    Index const n_rf = get<Index>(j, "slider", "n_rf");
    auto const &m = j.at("slider").at("matrix");
    if (m.is_string()) {
      std::string const name = m.get<std::string>();
      if (name == "identity") c.slider = SliderEncoding::identity(n_rf);
      else if (name == "dft5" || name == "dft") c.slider = SliderEncoding::dft(name == "dft5" ? 5 : n_rf);
      else bad("slider.matrix must be \"identity\", \"dft5\", \"dft\" or a matrix");
    } else {
      if (!m.is_array() || m.empty()) bad("slider.matrix must be a non-empty array of rows");
      c.slider.n_rf = Index(m.size());
      c.slider.n_thin = Index(m.at(0).size());
      c.slider.matrix.clear();
      for (auto const &row : m) {
        if (Index(row.size()) != c.slider.n_thin) bad("slider.matrix rows must have equal length");
        for (auto const &v : row)
          c.slider.matrix.push_back(v.is_array() ? cplx(v.at(0).get<double>(), v.at(1).get<double>())
                                                 : cplx(v.get<double>(), 0.0));
      }
    }
    if (c.slider.n_rf != n_rf) bad("slider.n_rf does not match the slider matrix");
    if (nz % c.slider.n_thin != 0) bad("grid.nz must be a multiple of the slider's thin-slice count");
    if ((nz / c.slider.n_thin) % c.R_sms != 0) bad("sampling.R_sms must divide the number of slabs");

    // recon
    std::string const mode = get<std::string>(j, "recon", "mode");
    if (mode == "sense") c.mode = ReconMode::Sense;
    else if (mode == "multishot") c.mode = ReconMode::Multishot;
    else if (mode == "gslider_joint") c.mode = ReconMode::GsliderJoint;
    else bad("recon.mode must be sense, multishot or gslider_joint");
    std::string const psf = get<std::string>(j, "recon", "psf");
    if (psf == "true") c.psf = PsfSource::True;
    else if (psf == "calibrated") c.psf = PsfSource::Calibrated;
    else if (psf == "single") c.psf = PsfSource::Single;
    else if (psf == "none") c.psf = PsfSource::None;
    else bad("recon.psf must be true, calibrated, single or none");
    c.tol = get<double>(j, "recon", "tol");
    c.max_iters = get<int>(j, "recon", "max_iters");
    c.lowpass_fraction = get<double>(j, "recon", "lowpass_fraction");
    auto const &lr = j.at("recon").at("lowrank");
    c.lowrank.kernel = lr.at("kernel").get<Index>();
    c.lowrank.keep_fraction = lr.at("keep_fraction").get<double>();
    c.lowrank.fista_iters = lr.at("fista_iters").get<int>();
    c.lowrank.cg_inner_iters = lr.at("cg_inner_iters").get<int>();
    if (c.tol <= 0 || c.max_iters < 0) bad("recon.tol must be > 0 and recon.max_iters >= 0");
    if (c.lowpass_fraction <= 0 || c.lowpass_fraction > 1) bad("recon.lowpass_fraction must be in (0, 1]");
    try {
      c.lowrank.validate();
    } catch (Error const &e) {
      bad(std::string("recon.lowrank: ") + e.what());
    }
    if (c.mode != ReconMode::Sense && c.n_shots < 2 && c.mode == ReconMode::Multishot)
      bad("recon.mode multishot needs sampling.n_shots >= 2");

    // analysis
    c.snr = get<double>(j, "analysis", "snr");
    c.seed = get<std::uint64_t>(j, "analysis", "seed");
    c.replicas = get<int>(j, "analysis", "replicas");
    c.gfactor_tol = get<double>(j, "analysis", "gfactor_tol");
    c.gfactor_max_iters = get<int>(j, "analysis", "gfactor_max_iters");
    c.gfactor_methods = get<std::vector<std::string>>(j, "analysis", "gfactor_methods");
    c.gfactor_solver = get<std::string>(j, "analysis", "gfactor_solver");
    if (c.gfactor_solver != "auto" && c.gfactor_solver != "direct" && c.gfactor_solver != "cg")
      bad("analysis.gfactor_solver must be auto, direct or cg");
    if (c.snr < 0) bad("analysis.snr must be >= 0");
    if (c.replicas < 50) bad("analysis.replicas must be >= 50");
    for (auto const &mname : c.gfactor_methods)
      if (mname != "blipped" && mname != "wave" && mname != "wave_one_cycle" && mname != "r1")
        bad("analysis.gfactor_methods entries must be r1, blipped, wave or wave_one_cycle");

    // psf_analysis
    auto const &pa = j.at("psf_analysis");
    double const pT = pa.at("T_r").get<double>();
    double const pdx = pa.at("dx_mm").get<double>();
    if (pT <= 0 || pdx <= 0) bad("psf_analysis.T_r and dx_mm must be > 0");
    c.psf_analysis.nx = pa.at("nx").get<Index>();
    c.psf_analysis.dx = pdx;
    c.psf_analysis.n_thin = pa.at("n_thin").get<Index>();
    c.psf_analysis.thin_mm = pa.at("thin_mm").get<double>();
    c.psf_analysis.sub_per_thin = pa.at("sub_per_thin").get<Index>();
    c.psf_analysis.dwell_super = pa.at("dwell_super").get<Index>();
    c.psf_analysis.spec_z = {Axis::Z, WaveShape::Sine, pa.at("G_w_z").get<double>(), 1.0, pT,
                             readout_gradient(pdx, pT), R_max};
    c.psf_analysis_G_w_y = pa.at("G_w_y").get<double>();

    c.output_dir = get<std::string>(j, "io", "output_dir");
  } catch (json::exception const &e) {
    bad(std::string("config: ") + e.what());
  }
  return c;
}

} // namespace wave
