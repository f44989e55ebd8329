// wave-epi: command-line workbench over the simulation and reconstruction library.
#include "wave/config.hpp"
#include "wave/error.hpp"
#include "wave/io.hpp"
#include "wave/metrics.hpp"
#include "wave/parallel.hpp"
#include "wave/pipeline.hpp"
#include "wave/simd/kernels.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wave;

namespace {

struct Run {
  json doc;
  ExperimentConfig cfg;
  fs::path out;
  bool allow_slew = false;
};

Run load(std::string const &config_path, std::vector<std::string> const &overrides, bool allow_slew) {
  json user;
  if (!config_path.empty()) {
    try {
      user = json::parse(read_file(config_path));
    } catch (json::exception const &e) {
      throw Error(ErrorKind::InvalidConfig, "config " + config_path + " is not valid JSON: " + e.what());
    }
  }
  Run r;
  r.doc = resolve_config(user);
  for (auto const &o : overrides) {
    std::string a = o.rfind("--", 0) == 0 ? o.substr(2) : o;
    if (a.rfind("mode=", 0) == 0) a = "recon." + a;
    apply_override(r.doc, a);
  }
  r.cfg = parse_config(r.doc);
  r.out = r.cfg.output_dir;
  r.allow_slew = allow_slew;
  fs::create_directories(r.out);
  write_file_atomic((r.out / "resolved_config.json").string(), r.doc.dump(2) + "\n");
  return r;
}

std::string path(Run const &r, std::string const &name) { return (r.out / name).string(); }

void write_slices(Run const &r, std::string const &stem, ComplexVolume const &v) {
  for (Index z = 0; z < v.grid.nz; ++z) write_pgm_slice(path(r, stem + "_z" + std::to_string(z) + ".pgm"), v, z);
}

json psf_json(PsfSet const &p) {
  return {{"psi_y_pos", p.psi_y[0]}, {"psi_y_neg", p.psi_y[1]}, {"psi_z_pos", p.psi_z[0]}, {"psi_z_neg", p.psi_z[1]}};
}

// K-space blocks as complex128 volumes (nx, lines, groups, coils) plus a manifest.
void write_dataset(Run const &r, ShotDataSet const &d) {
  json blocks = json::array();
  for (std::size_t b = 0; b < d.blocks.size(); ++b) {
    auto const &blk = d.blocks[b];
    VolumeFile f;
    f.dims = {d.nx, Index(blk.ky.size()), d.ngroups, d.ncoils};
    f.dtype = "complex128";
    f.domain = {Domain::Frequency, Domain::Frequency, Domain::Image};
    f.values.reserve(blk.data.size() * 2);
    for (auto const &c : blk.data) {
      f.values.push_back(c.real());
      f.values.push_back(c.imag());
    }
    std::string const base = "kspace_block" + std::to_string(b);
    write_volume_file(path(r, base), f);
    blocks.push_back({{"file", base + ".json"},
                      {"shot", blk.shot},
                      {"rf", blk.rf},
                      {"polarity", to_string(blk.polarity)},
                      {"ky", blk.ky}});
  }
  json m{{"nx", d.nx}, {"ngroups", d.ngroups}, {"ncoils", d.ncoils}, {"sigma", d.sigma}, {"blocks", blocks}};
  write_file_atomic(path(r, "dataset.json"), m.dump(2) + "\n");
}

ShotDataSet read_dataset(fs::path const &dir) {
  json const m = json::parse(read_file((dir / "dataset.json").string()));
  ShotDataSet d;
  d.nx = m.at("nx").get<Index>();
  d.ngroups = m.at("ngroups").get<Index>();
  d.ncoils = m.at("ncoils").get<Index>();
  d.sigma = m.at("sigma").get<double>();
  for (auto const &b : m.at("blocks")) {
    DataBlock blk;
    blk.shot = b.at("shot").get<Index>();
    blk.rf = b.at("rf").get<Index>();
    blk.polarity = b.at("polarity").get<std::string>() == "negative" ? Polarity::Negative : Polarity::Positive;
    blk.ky = b.at("ky").get<std::vector<Index>>();
    VolumeFile const f = read_volume_file((dir / b.at("file").get<std::string>()).string());
    if (f.dtype != "complex128" && f.dtype != "complex64")
      throw Error(ErrorKind::Io, "k-space block " + b.at("file").get<std::string>() + " is not complex");
    blk.data.resize(f.values.size() / 2);
    for (std::size_t i = 0; i < blk.data.size(); ++i) blk.data[i] = cplx(f.values[2 * i], f.values[2 * i + 1]);
    d.blocks.push_back(std::move(blk));
  }
  return d;
}

void write_calibration(Run const &r, Calibration const &cal, PsfSet const &truth) {
  json coeffs = json::array();
  char const *axes[2] = {"y", "z"};
  for (int a = 0; a < 2; ++a)
    for (int p = 0; p < 2; ++p) {
      auto const &c = cal.coeffs[std::size_t(a)][std::size_t(p)];
      json q = json::array();
      for (auto const &v : c.q) q.push_back({v.real(), v.imag()});
      coeffs.push_back({{"axis", axes[a]},
                        {"polarity", to_string(c.polarity)},
                        {"freqs_per_ms", c.freqs},
                        {"offset", c.offset},
                        {"q", q},
                        {"fit_cost", cal.fits[std::size_t(a)][std::size_t(p)].cost},
                        {"fit_iterations", cal.fits[std::size_t(a)][std::size_t(p)].iterations}});
    }
  json j{{"coefficients", coeffs}, {"psf", psf_json(cal.psfs)}, {"true_psf", psf_json(truth)}};
  write_file_atomic(path(r, "calibration.json"), j.dump(2) + "\n");

  CsvTable t({"axis", "polarity", "kx", "psi_true", "psi_direct", "psi_auto", "confidence"});
  for (int a = 0; a < 2; ++a)
    for (int p = 0; p < 2; ++p) {
      auto const &tr = a == 0 ? truth.psi_y[std::size_t(p)] : truth.psi_z[std::size_t(p)];
      auto const &au = a == 0 ? cal.psfs.psi_y[std::size_t(p)] : cal.psfs.psi_z[std::size_t(p)];
      auto const &di = cal.direct[std::size_t(a)][std::size_t(p)];
      for (std::size_t k = 0; k < tr.size(); ++k)
        t.add({axes[a], to_string(Polarity(p)), std::to_string(k), fmt(tr[k]), fmt(di.psi[k]), fmt(au[k]),
               fmt(di.confidence[k])});
    }
  t.write(path(r, "calibration_psf.csv"));
}

PsfSet load_psfs(Run const &r, Experiment const &ex, std::string const &cal_path) {
  if (r.cfg.psf == PsfSource::True || r.cfg.psf == PsfSource::None) return recon_psfs(ex, r.cfg.psf, nullptr);
  PsfSet p;
  if (!cal_path.empty()) {
    json const j = json::parse(read_file(cal_path)).at("psf");
    p.psi_y = {j.at("psi_y_pos").get<std::vector<double>>(), j.at("psi_y_neg").get<std::vector<double>>()};
    p.psi_z = {j.at("psi_z_pos").get<std::vector<double>>(), j.at("psi_z_neg").get<std::vector<double>>()};
    if (p.nx() != ex.thin.nx) throw Error(ErrorKind::InvalidConfig, "calibration readout length does not match grid.nx");
  } else {
    p = run_calibration(ex).psfs;
  }
  return r.cfg.psf == PsfSource::Single ? p.single() : p;
}

int cmd_phantom(Run const &r) {
  Experiment const ex = build_experiment(r.cfg, r.allow_slew);
  write_volume_file(path(r, "phantom"), to_volume_file(ex.phantom));
  write_volume_file(path(r, "coil_rss"), to_volume_file(ex.thin, ex.coils->rss()));
  write_slices(r, "phantom", ex.phantom);
  return 0;
}

int cmd_simulate(Run const &r) {
  Experiment const ex = build_experiment(r.cfg, r.allow_slew);
  write_volume_file(path(r, "phantom"), to_volume_file(ex.phantom, "complex128"));
  write_dataset(r, simulate(ex));
  return 0;
}

int cmd_calibrate(Run const &r) {
  Experiment const ex = build_experiment(r.cfg, r.allow_slew);
  write_calibration(r, run_calibration(ex), ex.true_psfs);
  return 0;
}

int cmd_recon(Run const &r, std::string const &data_dir, std::string const &cal_path) {
  Experiment const ex = build_experiment(r.cfg, r.allow_slew);
  ShotDataSet const data = data_dir.empty() ? simulate(ex) : read_dataset(data_dir);
  ReconOutput const o = reconstruct(ex, data, load_psfs(r, ex, cal_path));
  write_volume_file(path(r, "recon"), to_volume_file(o.image));
  write_slices(r, "recon", o.image);

  CsvTable stats({"method", "nrmse", "nrmse_magnitude", "ghost_energy", "iterations", "converged"});
  auto row = [&](std::string const &m, ComplexVolume const &img, int it, bool conv) {
    stats.add({m, fmt(nrmse(img, ex.phantom, ex.mask)), fmt(nrmse_magnitude(img, ex.phantom, ex.mask)),
               fmt(ghost_energy(img, ex.mask)), std::to_string(it), conv ? "1" : "0"});
  };
  row(o.method, o.image, o.iterations, o.converged);
  if (o.naive) {
    row("naive", *o.naive, 0, true);
    write_volume_file(path(r, "recon_naive"), to_volume_file(*o.naive));
  }
  if (o.uncorrected) row("uncorrected", *o.uncorrected, 0, true);
  stats.write(path(r, "recon_stats.csv"));

  CsvTable trace({"iteration", "residual", "cost"});
  std::size_t const n = std::max(o.residual.size(), o.cost.size());
  for (std::size_t i = 0; i < n; ++i)
    trace.add({std::to_string(i), i < o.residual.size() ? fmt(o.residual[i]) : "", i < o.cost.size() ? fmt(o.cost[i]) : ""});
  trace.write(path(r, "recon_trace.csv"));
  return 0;
}

// Published fold-gains for side-by-side reporting; they depend on the scanner's coil array.
struct ReportedRatio {
  Index R_in, R_sms;
  double mean, max;
};
constexpr ReportedRatio kReported[] = {{3, 3, 1.21, 1.41}, {4, 3, 1.37, 1.77}};

int cmd_gfactor(Run const &r) {
  for (auto const *spec : {&r.cfg.wave_y, &r.cfg.wave_z})
    if (!check_slew(*spec).ok && !r.allow_slew)
      throw Error(ErrorKind::SlewViolation, std::string("wave ") + to_string(spec->axis) + " exceeds the slew limit");
  CsvTable t({"method", "R_in", "R_sms", "r_eff", "mean_g", "max_g", "voxels", "excluded", "replicas", "solver"});
  double blipped_mean = 0, blipped_max = 0, wave_mean = 0, wave_max = 0;
  for (auto const &m : r.cfg.gfactor_methods) {
    GFactorRun const g = run_gfactor(r.cfg, m);
    auto const vcfg = gfactor_variant(r.cfg, m);
    t.add({m, std::to_string(vcfg.R_in), std::to_string(vcfg.R_sms), fmt(g.result.r_eff), fmt(g.result.mean_g),
           fmt(g.result.max_g), std::to_string(g.result.voxels), std::to_string(g.result.excluded),
           std::to_string(r.cfg.replicas), g.solver});
    write_volume_file(path(r, "gmap_" + m), to_volume_file(r.cfg.grid, g.result.gmap));
    if (m == "blipped") blipped_mean = g.result.mean_g, blipped_max = g.result.max_g;
    if (m == "wave") wave_mean = g.result.mean_g, wave_max = g.result.max_g;
  }
  t.write(path(r, "gfactor.csv"));

  if (blipped_mean > 0 && wave_mean > 0) {
    CsvTable cmp({"R_in", "R_sms", "mean_ratio", "max_ratio", "reported_mean_ratio", "reported_max_ratio"});
    std::string rep_mean = "", rep_max = "";
    for (auto const &p : kReported)
      if (p.R_in == r.cfg.R_in && p.R_sms == r.cfg.R_sms) rep_mean = fmt(p.mean), rep_max = fmt(p.max);
    cmp.add({std::to_string(r.cfg.R_in), std::to_string(r.cfg.R_sms), fmt(blipped_mean / wave_mean),
             fmt(blipped_max / wave_max), rep_mean, rep_max});
    cmp.write(path(r, "gfactor_ratio.csv"));
  }
  return 0;
}

int cmd_psf_analyze(Run const &r) {
  auto spec = r.cfg.psf_analysis;
  if (!check_slew(spec.spec_z).ok && !r.allow_slew)
    throw Error(ErrorKind::SlewViolation, "psf_analysis wave z exceeds the slew limit");
  CsvTable summary({"recon", "fwhm_mm", "fwhm_extension_mm", "max_sidelobe"});
  CsvTable prof({"recon", "thin_slice", "x_mm", "magnitude"});
  for (auto const mode : {PsfRecon::Standard, PsfRecon::Joint}) {
    auto const res = psf_profile(spec, mode);
    std::string const name = mode == PsfRecon::Standard ? "standard" : "joint";
    summary.add({name, fmt(res.fwhm_mm), fmt(res.fwhm_extension_mm), fmt(res.max_sidelobe)});
    for (std::size_t t = 0; t < res.profiles.size(); ++t)
      for (std::size_t x = 0; x < res.profiles[t].size(); ++x)
        prof.add({name, std::to_string(t), fmt((double(x) - double(spec.nx / 2)) * spec.dx), fmt(res.profiles[t][x])});
  }
  summary.write(path(r, "psf_summary.csv"));
  prof.write(path(r, "psf_profiles.csv"));
  return 0;
}

int exit_code(ErrorKind k) {
  switch (k) {
  case ErrorKind::InvalidConfig: return 2;
  case ErrorKind::SlewViolation: return 3;
  case ErrorKind::Divergence: return 4;
  default: return 1;
  }
}

int report(char const *kind, std::string const &msg, std::vector<double> const &trace, int code) {
  json e{{"error", kind}, {"message", msg}, {"exit_code", code}};
  if (!trace.empty()) e["trace"] = trace;
  std::cerr << e.dump() << "\n";
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Wave-encoded EPI simulation and reconstruction workbench"};
  app.require_subcommand(1);
  app.allow_extras();

  std::string config_path, data_dir, cal_path;
  bool allow_slew = false;
  auto add = [&](char const *name, char const *help) {
    auto *s = app.add_subcommand(name, help);
    s->add_option("config", config_path, "Experiment config (JSON)");
    s->add_flag("--allow-slew-violation", allow_slew, "Run even when a wave exceeds the slew limit");
    s->allow_extras();
    return s;
  };
  auto *phantom = add("phantom", "Write the phantom and coil RSS");
  auto *sim = add("simulate", "Simulate k-space data");
  auto *cal = add("calibrate-psf", "Estimate dual-polarity PSFs from reference scans");
  auto *rec = add("recon", "Reconstruct (simulates when --data is not given)");
  rec->add_option("--data", data_dir, "Directory holding dataset.json");
  rec->add_option("--calibration", cal_path, "calibration.json for psf=calibrated|single");
  auto *gf = add("gfactor", "Pseudo-replica g-factor maps per method");
  auto *pa = add("psf-analyze", "Slab-direction PSF profiles, standard vs joint");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App *active = app.get_subcommands().front();
    Run const r = load(config_path, active->remaining(), allow_slew);
    std::cerr << "wave-epi " << active->get_name() << ": simd=" << simd::isa_name(simd::active().isa) << " threads=" << thread_count()
              << " out=" << r.out.string() << "\n";
    if (active == phantom) return cmd_phantom(r);
    if (active == sim) return cmd_simulate(r);
    if (active == cal) return cmd_calibrate(r);
    if (active == rec) return cmd_recon(r, data_dir, cal_path);
    if (active == gf) return cmd_gfactor(r);
    if (active == pa) return cmd_psf_analyze(r);
  } catch (Error const &e) {
    return report(to_string(e.kind()), e.what(), e.trace(), exit_code(e.kind()));
  } catch (std::exception const &e) {
    return report("Internal", e.what(), {}, 1);
  }
  return 1;
}
