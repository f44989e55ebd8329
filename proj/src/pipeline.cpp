#include "wave/pipeline.hpp"

#include "wave/error.hpp"
#include "wave/io.hpp"

#include <cmath>

namespace wave {

EncodingContext Experiment::context(PsfSet const &psfs, bool with_phases) const {
  EncodingContext ctx{thin, coils, psfs, pattern, cfg.slider, {}, {}};
  if (with_phases) ctx.phases = phases;
  return ctx;
}

Experiment build_experiment(ExperimentConfig const &cfg, bool allow_slew_violation) {
  for (auto const *spec : {&cfg.wave_y, &cfg.wave_z}) {
    auto const sc = check_slew(*spec);
    if (!sc.ok && !allow_slew_violation)
      throw Error(ErrorKind::SlewViolation, std::string("wave ") + to_string(spec->axis) + " amplitude " +
                                                fmt(spec->G_w) + " mT/m exceeds the slew-limited maximum " +
                                                fmt(sc.max_gw_allowed) + " mT/m");
  }
  Experiment ex;
  ex.cfg = cfg;
  ex.thin = cfg.grid;
  ex.slab = slab_grid(cfg.grid, cfg.slider.n_thin);
  ex.phantom = make_phantom(ex.thin, cfg.phantom);
  ex.mask = support_mask(ex.phantom);
  ex.coils = std::make_shared<CoilMaps const>(cfg.uniform_coils ? uniform_coils(ex.thin, cfg.coils.ncoils)
                                                                : make_coil_maps(ex.thin, cfg.coils));
  try {
    ex.pattern = make_pattern(ex.thin.ny, ex.slab.nz, cfg.R_in, cfg.R_sms, cfg.n_shots, cfg.partial_fourier,
                              cfg.caipi_den, cfg.shot_interleave);
  } catch (Error const &e) {
    throw Error(ErrorKind::InvalidConfig, std::string("sampling: ") + e.what());
  }
  ex.true_psfs = make_psf_set(cfg.wave_y, cfg.wave_z, ex.thin.nx, cfg.imperfection);
  if (cfg.shot_phase_rad > 0) {
    ShotPhase slab_phase{cfg.n_shots, cfg.slider.n_rf,
                         make_smooth_phases(ex.slab, cfg.n_shots * cfg.slider.n_rf, cfg.shot_phase_rad,
                                            cfg.shot_phase_cycles, cfg.shot_phase_seed)};
    ex.phases = phase_to_thin(slab_phase, ex.slab, ex.thin);
  }
  return ex;
}

double noise_sigma(ComplexVolume const &phantom, std::vector<char> const &mask, double snr) {
  require(snr > 0, "noise_sigma: snr must be > 0");
  double sum = 0;
  Index n = 0;
  for (std::size_t i = 0; i < phantom.data.size(); ++i)
    if (mask.empty() || mask[i]) {
      sum += std::abs(phantom.data[i]);
      ++n;
    }
  require(n > 0, "noise_sigma: empty support");
  return sum / double(n) / snr;
}

ShotDataSet simulate(Experiment const &ex) {
  ShotDataSet d = encode(ex.phantom, ex.context(ex.true_psfs, true));
  if (ex.cfg.snr > 0) {
    double const sigma = noise_sigma(ex.phantom, ex.mask, ex.cfg.snr);
    CVec flat = d.flatten();
    add_noise(flat, sigma, ex.cfg.seed);
    d.assign(flat);
    d.sigma = sigma;
  }
  return d;
}

Calibration run_calibration(Experiment const &ex) {
  ReferenceSpec ref;
  ref.ky_fraction = ex.cfg.ref_ky_fraction;
  ref.sigma = ex.cfg.ref_snr > 0 ? noise_sigma(ex.phantom, ex.mask, ex.cfg.ref_snr) : 0.0;
  ref.seed = ex.cfg.ref_seed;
  auto const scan = simulate_reference(ex.phantom, *ex.coils, ex.cfg.wave_y, ex.cfg.wave_z, ex.cfg.imperfection, ref);
  return calibrate(scan, ex.cfg.wave_y, ex.cfg.wave_z, ex.cfg.harmonics);
}

PsfSet recon_psfs(Experiment const &ex, PsfSource src, Calibration const *cal) {
  switch (src) {
  case PsfSource::True: return ex.true_psfs;
  case PsfSource::None: return PsfSet::none(ex.thin.nx);
  case PsfSource::Calibrated:
  case PsfSource::Single:
    require(cal != nullptr, "recon_psfs: calibration required");
    return src == PsfSource::Single ? cal->psfs.single() : cal->psfs;
  }
  return ex.true_psfs;
}

namespace {

ReconOutput from_solve(std::string method, VolumeSolve s) {
  ReconOutput o;
  o.method = std::move(method);
  o.image = std::move(s.image);
  o.residual = std::move(s.residual);
  o.cost = std::move(s.cost);
  o.iterations = s.iterations;
  o.converged = s.converged;
  return o;
}

void check_finite(ComplexVolume const &v, std::vector<double> const &trace, char const *what) {
  if (!v.all_finite()) throw Error(ErrorKind::Divergence, std::string(what) + " produced non-finite values", trace);
}

} // namespace

ReconOutput reconstruct(Experiment const &ex, ShotDataSet const &data, PsfSet const &psfs) {
  auto const &cfg = ex.cfg;
  SolverOptions const opt{cfg.tol, cfg.max_iters};
  EncodingContext const plain = ex.context(psfs, false);

  if (cfg.mode == ReconMode::Sense) {
    auto o = from_solve("sense", sense_cg(data, plain, opt));
    check_finite(o.image, o.residual, "sense");
    return o;
  }

  // Per-(shot, rf) interim images on the slab grid.
  Index const ns = cfg.n_shots, nr = cfg.slider.n_rf;
  EncodingContext slab_ctx = plain;
  slab_ctx.grid = ex.slab;
  slab_ctx.slider = SliderEncoding::identity(1);
  if (cfg.slider.n_thin != 1) {
    auto coils = cfg.uniform_coils ? uniform_coils(ex.slab, cfg.coils.ncoils) : make_coil_maps(ex.slab, cfg.coils);
    slab_ctx.coils = std::make_shared<CoilMaps const>(std::move(coils));
  }
  std::vector<ComplexVolume> interim;
  std::vector<double> fista_cost;
  if (ns >= 2) {
    auto ms = multishot_fista(data, slab_ctx, cfg.lowrank, cfg.seed);
    interim = std::move(ms.images);
    fista_cost = std::move(ms.cost);
  } else {
    for (Index r = 0; r < nr; ++r) interim.push_back(sense_cg(select_unit(data, 0, r), slab_ctx, opt).image);
  }
  for (auto const &img : interim) check_finite(img, fista_cost, "multishot interim reconstruction");

  // Shot phases only matter when more than one shot has to be combined.
  ShotPhase slab_phase{ns, nr, {}};
  if (ns >= 2) slab_phase = estimate_shot_phase(interim, ns, nr, cfg.lowpass_fraction);
  else
    for (Index r = 0; r < nr; ++r) slab_phase.maps.emplace_back(std::size_t(ex.slab.size()), cplx(1.0, 0.0));
  ComplexVolume init = gslider_init(interim, slab_phase, cfg.slider, ex.thin);

  ReconOutput out;
  if (cfg.mode == ReconMode::Multishot) {
    require(cfg.slider.n_thin == 1 && cfg.slider.n_rf == 1, "multishot mode needs an identity 1x1 slider");
    out.method = "multishot";
    out.image = std::move(init);
    out.cost = std::move(fista_cost);
    out.iterations = cfg.lowrank.fista_iters;
    out.converged = true;
  } else {
    EncodingContext joint = plain;
    if (ns >= 2) joint.phases = phase_to_thin(slab_phase, ex.slab, ex.thin);
    out = from_solve("gslider_joint", gslider_joint_cg(data, joint, opt, init));
    check_finite(out.image, out.residual, "gslider joint");
  }
  if (ns >= 2) {
    out.naive = adjoint_combine(data, plain);
    out.uncorrected = sense_cg(data, plain, opt).image;
  }
  return out;
}

ExperimentConfig gfactor_variant(ExperimentConfig cfg, std::string const &method) {
  cfg.mode = ReconMode::Sense;
  cfg.shot_phase_rad = 0.0;
  cfg.imperfection = {};
  if (method == "r1") {
    cfg.R_in = 1;
    cfg.R_sms = 1;
    cfg.n_shots = 1;
    cfg.partial_fourier = 1.0;
    cfg.wave_y.G_w = 0.0;
    cfg.wave_z.G_w = 0.0;
  } else if (method == "blipped") {
    cfg.wave_y.G_w = 0.0;
    cfg.wave_z.G_w = 0.0;
  } else if (method == "wave_one_cycle") {
    cfg.wave_y.n_c = 2.0 * cfg.wave_y.n_c;
    cfg.wave_y.G_w = cfg.wave_y.G_w / 2.0;
  } else if (method != "wave") {
    throw Error(ErrorKind::InvalidConfig, "unknown g-factor method '" + method + "'");
  }
  return cfg;
}

GFactorRun run_gfactor(ExperimentConfig const &base, std::string const &method) {
  ExperimentConfig const cfg = gfactor_variant(base, method);
  Experiment const ex = build_experiment(cfg, true);
  EncodingContext const ctx = ex.context(ex.true_psfs, false);
  ShotDataSet const clean = encode(ex.phantom, ctx);
  double const sigma = noise_sigma(ex.phantom, ex.mask, cfg.snr > 0 ? cfg.snr : 20.0);
  Index const group_unknowns = ex.thin.size() / ex.pattern.ngroups();
  bool const direct =
      cfg.gfactor_solver == "direct" || (cfg.gfactor_solver == "auto" && group_unknowns <= kDenseGroupLimit);
  SolverOptions const opt{cfg.gfactor_tol, cfg.gfactor_max_iters};
  std::unique_ptr<DenseSense> dense;
  if (direct) dense = std::make_unique<DenseSense>(ctx);
  ReconFn const recon = [&](ShotDataSet const &d) { return direct ? dense->solve(d) : sense_cg(d, ctx, opt).image; };
  GFactorRun run;
  run.method = method;
  run.solver = direct ? "direct" : "cg";
  run.total_lines = ex.pattern.total_lines();
  run.result = gfactor_pseudo_replica(recon, clean, reference_std(*ex.coils, sigma), effective_r(ex.pattern), ex.mask,
                                      sigma, cfg.replicas, cfg.seed);
  return run;
}

} // namespace wave
