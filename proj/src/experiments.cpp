#include "brox/experiments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <tuple>

#include <Eigen/Core>

#include "brox/diffusion.hpp"
#include "brox/errors.hpp"
#include "brox/generator.hpp"
#include "brox/noise.hpp"
#include "brox/paracontrolled.hpp"
#include "brox/spectrum.hpp"
#include "brox/weight.hpp"

#ifndef BROX_VERSION
#define BROX_VERSION "0.0.0"
#endif

namespace brox::exp {

namespace fs = std::filesystem;
using io::Table;

// ---------------------------------------------------------------- outcome

bool Outcome::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> Outcome::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) {
      std::string bound = c.relation == "in" ? "[" + format_double(c.threshold) + ", " + format_double(c.threshold_hi) + "]"
                                             : format_double(c.threshold);
      out.push_back(c.name + " = " + format_double(c.value) + " (required " + c.relation + " " + bound + ")");
    }
  return out;
}

Check& Outcome::check(const std::string& name, double value, const std::string& relation, double threshold) {
  Check c{name, value, relation, threshold, 0.0, false};
  if (relation == "<=") c.pass = value <= threshold;
  else if (relation == ">=") c.pass = value >= threshold;
  else if (relation == "<") c.pass = value < threshold;
  else if (relation == ">") c.pass = value > threshold;
  else throw ParameterError("unknown relation " + relation);
  if (std::isnan(value)) c.pass = false;
  checks.push_back(c);
  return checks.back();
}

Check& Outcome::check_in(const std::string& name, double value, double lo, double hi) {
  checks.push_back({name, value, "in", lo, hi, value >= lo && value <= hi});
  return checks.back();
}

void Outcome::metric(int n, int M, double t, const std::string& name, double value) {
  metrics.add(command, std::to_string(seed), std::to_string(n), std::to_string(M), t, name, value);
}

double dyadic_step(double limit) {
  if (!(limit > 0)) throw ParameterError("dyadic_step: limit must be positive");
  return std::exp2(std::floor(std::log2(limit)));
}

double ceil_to(double x, double unit) { return unit * std::ceil(x / unit - 1e-9); }

std::string version_string() { return BROX_VERSION; }

// ---------------------------------------------------------------- shared setup

namespace {

constexpr double record_unit = 1.0 / 32;  // auto stride spacing and MC time lattice
constexpr double probe_decay = 4.0;

PeriodicGrid grid_of(const ExperimentConfig& c) { return PeriodicGrid(static_cast<std::size_t>(c.grid_M), c.grid_K); }

NoiseRealization noise_of(const ExperimentConfig& c, std::uint64_t seed) {
  NoiseRealization z = sample_noise(seed, c.noise_K_max);
  if (c.noise_flat)
    for (auto& x : z.coeffs) x = 0.0;
  return z;
}

int max_level(const ExperimentConfig& c) {
  if (c.noise_levels.empty()) throw ConfigError("noise.levels: must not be empty");
  return *std::max_element(c.noise_levels.begin(), c.noise_levels.end());
}

std::vector<int> sorted_levels(const ExperimentConfig& c) {
  std::vector<int> l = c.noise_levels;
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());
  return l;
}

GammaOptions gamma_options(const ExperimentConfig& c) { return {c.generator_gamma_tolerance, 200}; }

int reference_N(const ExperimentConfig& c, const EnhancedNoise& Xi) {
  return c.generator_N > 0 ? c.generator_N : estimate_N_Xi(Xi);
}

std::vector<FourierField> probes_of(const ExperimentConfig& c, const PeriodicGrid& g) {
  return probe_fields(g, c.generator_probes, c.generator_probe_seed, probe_decay);
}

double rel_sup(const FourierField& a, const FourierField& ref) {
  const double den = sup_norm(ref);
  return den > 0 ? sup_norm(a - ref) / den : sup_norm(a);
}

FourierField potential_at(const ExperimentConfig& c, std::uint64_t seed, int n) {
  return potential(noise_of(c, seed), n, grid_of(c));
}

struct Spectral {
  WeightedGalerkin gal;
  SpectralDecomposition dec;
};

// `kernel`: use the configured kernel basis instead of the Fourier basis.
Spectral spectral_at(const ExperimentConfig& c, std::uint64_t seed, int n, bool kernel = false) {
  const FourierField W = potential_at(c, seed, n);
  const WeightSpectrum w = weight_coefficients(W);
  const int Kb = std::max(c.spectral_basis_modes, static_cast<int>(std::ceil(c.spectral_band_factor * w.band())));
  const bool ground = kernel && c.spectral_kernel_basis == "ground_state";
  Spectral s{ground ? assemble_ground_state(W, Kb) : assemble_weighted(w, Kb), {}};
  s.dec = eigendecompose(s.gal, n);
  return s;
}

// spectral.points, doubled until the grid integrates e_m e_m' e^{2W} exactly.
std::size_t kernel_points(const ExperimentConfig& c, const Spectral& s) {
  auto P = static_cast<std::size_t>(c.spectral_points);
  const auto need = 2 * static_cast<std::size_t>(s.dec.basis_modes()) + static_cast<std::size_t>(s.gal.weight.band()) + 1;
  while (P < need) P *= 2;
  return P;
}

double mc_dt(const ExperimentConfig& c, const FourierField& xi) {
  return c.mc_dt > 0 ? c.mc_dt : dyadic_step(c.mc_dt_fraction * stable_dt(xi));
}

std::size_t stride_for(const ExperimentConfig& c, double dt, double unit = record_unit) {
  if (c.mc_stride > 0) return static_cast<std::size_t>(c.mc_stride);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(unit / dt)));
}

SimulationPlan base_plan(const ExperimentConfig& c, const Context& ctx, double dt) {
  SimulationPlan p;
  p.x0 = c.mc_x0;
  p.dt = dt;
  p.n_paths = static_cast<std::size_t>(c.mc_n_paths);
  p.master_seed = c.master_seed;
  p.threads = ctx.threads;
  return p;
}

double argmax_abs_e2(const SpectralDecomposition& dec, std::size_t points) {
  const Eigen::MatrixXd e = dec.eigenfunctions(points, 2);
  Eigen::Index i = 0;
  e.col(1).cwiseAbs().maxCoeff(&i);
  return 2 * M_PI * static_cast<double>(i) / static_cast<double>(points);
}

// ---------------------------------------------------------------- runners

Outcome start(const std::string& command, std::uint64_t seed) {
  Outcome o;
  o.command = command;
  o.seed = seed;
  return o;
}

Outcome run_sample_noise(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("sample-noise", seed);
  const PeriodicGrid g = grid_of(c);
  const NoiseRealization z = noise_of(c, seed);
  Table t{"brox.noise/1", {"k", "re", "im"}};
  for (int k = 1; k <= z.k_max(); ++k) t.add(k, z.xi(k).real(), z.xi(k).imag());
  o.tables["noise.csv"] = std::move(t);
  Table lv{"brox.noise_levels/1", {"n", "xi_holder_norm", "delta_W"}};
  for (int n : sorted_levels(c)) {
    const FourierField xi = truncate(z, n, g);
    const double h = holder_norm(xi, c.noise_alpha - 2.0);
    const double dw = delta_W(potential_of(xi));
    lv.add(n, h, dw);
    o.metric(n, c.grid_M, 0, "xi_holder_norm", h);
    o.metric(n, c.grid_M, 0, "delta_W", dw);
    o.fields.emplace_back("xi_n" + std::to_string(n) + ".bin", xi);
  }
  o.tables["levels.csv"] = std::move(lv);
  if (c.noise_renorm_seeds > 0) {
    Table rz{"brox.renormalization/1", {"n", "seeds", "max_abs_z", "max_abs_mean"}};
    for (int n : sorted_levels(c)) {
      const RenormalizationEstimate e = estimate_renormalization(seed, c.noise_renorm_seeds, n, g);
      double mm = 0;
      for (double m : e.mean) mm = std::max(mm, std::abs(m));
      rz.add(n, e.samples, e.max_abs_z(), mm);
      o.metric(n, c.grid_M, 0, "renormalization_max_abs_z", e.max_abs_z());
      o.check("renormalization_max_abs_z[n=" + std::to_string(n) + "]", e.max_abs_z(), "<=", c.tolerances().z_max);
    }
    o.tables["renormalization.csv"] = std::move(rz);
  }
  return o;
}

Outcome run_enhance(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("enhance", seed);
  const PeriodicGrid g = grid_of(c);
  const NoiseRealization z = noise_of(c, seed);
  Table t{"brox.enhance/1", {"n", "xi_distance", "resonant_distance", "distance", "delta_W", "X1_defect", "X2_defect"}};
  double worst_defect = 0;
  int rows = 0;
  for (int n : sorted_levels(c)) {
    if (2 * n > c.noise_K_max) continue;
    const EnhancedNoise a = enhance(z, n, c.noise_alpha, g);
    const EnhancedNoise b = enhance(z, 2 * n, c.noise_alpha, g);
    const XiNorms d = enhanced_distance(b, a);
    const double d1 = a.X1.defect(), d2 = a.X2.defect();
    worst_defect = std::max({worst_defect, d1, d2});
    t.add(n, d.xi, d.resonant, d.total(), delta_W(a.W), d1, d2);
    o.metric(n, c.grid_M, 0, "distance", d.total());
    o.metric(n, c.grid_M, 0, "xi_distance", d.xi);
    o.metric(n, c.grid_M, 0, "resonant_distance", d.resonant);
    ++rows;
  }
  if (rows == 0) throw ConfigError("noise.levels: enhance needs a level n with 2n <= noise.K_max");
  o.tables["enhance.csv"] = std::move(t);
  o.check("source_defect_max", worst_defect, "<=", c.tolerances().exactness);
  return o;
}

Outcome run_gamma(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("gamma", seed);
  const Tolerances tol = c.tolerances();
  const PeriodicGrid g = grid_of(c);
  const NoiseRealization z = noise_of(c, seed);
  const int R = max_level(c);
  const EnhancedNoise XiR = enhance(z, R, c.noise_alpha, g);
  const int N = reference_N(c, XiR);
  const ParacontrolledMap mapR(XiR, N, LevelPolicy::clamp);
  const GammaOptions opt = gamma_options(c);

  Table rt{"brox.gamma_round_trip/1", {"probe", "phi_gamma_error", "gamma_phi_error", "iterations"}};
  double worst = 0;
  int i = 0;
  for (const FourierField& us : probes_of(c, g)) {
    const ParacontrolledFunction u = mapR.gamma(us, opt);
    const double e1 = sobolev_norm(mapR.phi(u.u) - us, 1.0) / std::max(1.0, sobolev_norm(us, 1.0));
    const ParacontrolledFunction back = mapR.gamma(mapR.phi(us), opt);
    const double e2 = sobolev_norm(back.u - us, 1.0) / std::max(1.0, sobolev_norm(us, 1.0));
    worst = std::max({worst, e1, e2});
    rt.add(i++, e1, e2, u.iterations);
  }
  o.tables["round_trip.csv"] = std::move(rt);
  o.metric(R, c.grid_M, 0, "round_trip_max", worst);
  o.check("round_trip_max", worst, "<=", tol.round_trip);

  const ParacontrolledFunction one = mapR.gamma(FourierField::constant(g, 1.0), opt);
  const double g1 = sup_norm(one.u - FourierField::constant(g, 1.0));
  o.metric(R, c.grid_M, 0, "gamma_one_error", g1);
  o.check("gamma_one_error", g1, "<=", tol.gamma_one);

  // Density: Γ at the reference level applied to Φₙ f, sharing N.
  FourierField f = FourierField::single_mode(g, 1, cplx(0.5, 0.0)) + FourierField::single_mode(g, 2, cplx(0.0, 0.25));
  const double fn = sobolev_norm(f, 1.0);
  Table dn{"brox.gamma_density/1", {"n", "density_error"}};
  double prev = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int n : sorted_levels(c)) {
    const ParacontrolledMap mapn(enhance(z, n, c.noise_alpha, g), N, LevelPolicy::clamp);
    const double e = sobolev_norm(f - mapR.gamma(mapn.phi(f), opt).u, 1.0) / fn;
    dn.add(n, e);
    o.metric(n, c.grid_M, 0, "density_error", e);
    if (e > prev * (1 + 1e-12)) ++increases;  // equal below N: Φₙ is the identity there
    prev = e;
  }
  o.tables["density.csv"] = std::move(dn);
  o.check("density_increasing_steps", increases, "<=", 0);
  o.extra["N"] = N;
  o.extra["reference_level"] = R;
  o.extra["density_probe"] = "cos(x) - 0.5 sin(2x)";
  return o;
}

Outcome run_generator_check(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("generator-check", seed);
  const Tolerances tol = c.tolerances();
  const PeriodicGrid g = grid_of(c);
  const NoiseRealization z = noise_of(c, seed);
  const auto probes = probes_of(c, g);
  const GammaOptions opt = gamma_options(c);
  Table t{"brox.generator_check/1", {"n", "N", "probe", "exactness", "form_uu", "symmetry"}};
  double ex_max = 0, form_min = std::numeric_limits<double>::infinity(), sym_max = 0;
  for (int n : sorted_levels(c)) {
    EnhancedNoise Xi = enhance(z, n, c.noise_alpha, g);
    const int N = c.generator_N > 0 ? c.generator_N : estimate_N_Xi(Xi);
    const GeneratorHandle H(std::move(Xi), N, c.generator_c_shift, LevelPolicy::clamp);
    std::vector<FourierField> us;
    for (const auto& p : probes) us.push_back(H.gamma(p, opt).u);
    double ex_n = 0, fm_n = std::numeric_limits<double>::infinity(), sy_n = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const ParacontrolledFunction u = H.gamma(probes[i], opt);
      const double ex = rel_sup(apply_L_expanded(u, H), apply_L_direct(u.u, H.Xi().xi));
      const double fuu = form_value(u.u, u.u, H);
      const FourierField& v = us[(i + 1) % us.size()];
      const double sy = std::abs(form_value(u.u, v, H) - form_value(v, u.u, H));
      t.add(n, H.N(), static_cast<int>(i), ex, fuu, sy);
      ex_n = std::max(ex_n, ex);
      fm_n = std::min(fm_n, fuu);
      sy_n = std::max(sy_n, sy);
    }
    o.metric(n, c.grid_M, 0, "exactness_max", ex_n);
    o.metric(n, c.grid_M, 0, "form_min", fm_n);
    o.metric(n, c.grid_M, 0, "symmetry_max", sy_n);
    ex_max = std::max(ex_max, ex_n);
    form_min = std::min(form_min, fm_n);
    sym_max = std::max(sym_max, sy_n);
  }
  o.tables["generator_check.csv"] = std::move(t);
  o.check("exactness_max_rel_error", ex_max, "<=", tol.exactness);
  o.check("form_min", form_min, ">=", -tol.form);
  o.check("form_symmetry_defect", sym_max, "<=", tol.form);
  return o;
}

Outcome run_resolvent(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("resolvent", seed);
  const PeriodicGrid g = grid_of(c);
  const NoiseRealization z = noise_of(c, seed);
  const int R = max_level(c);
  std::vector<int> levels;
  for (int n : sorted_levels(c))
    if (n < R) levels.push_back(n);
  if (levels.empty()) throw ConfigError("noise.levels: resolvent needs levels below the reference (largest) level");
  ResolventOptions ro;
  ro.tolerance = c.generator_resolvent_tolerance;
  ro.gamma = {std::min(c.generator_gamma_tolerance, 1e-13), 200};
  const FourierField f = probes_of(c, g).front();
  const auto rows = resolvent_convergence(f, z, g, c.noise_alpha, levels, R, c.generator_c_shift, ro);
  Table t{"brox.resolvent/1", {"n", "error", "distance", "ratio"}};
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& r : rows) {
    t.add(r.n, r.error, r.distance, r.ratio);
    o.metric(r.n, c.grid_M, 0, "error", r.error);
    o.metric(r.n, c.grid_M, 0, "ratio", r.ratio);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  o.tables["resolvent.csv"] = std::move(t);
  o.check("ratio_spread", lo > 0 ? hi / lo : std::numeric_limits<double>::infinity(), "<=", c.tolerances().resolvent_spread);
  return o;
}

Outcome run_spectrum(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("spectrum", seed);
  const Tolerances tol = c.tolerances();
  const int n = c.spectral_n;
  const Spectral s = spectral_at(c, seed, n);
  const auto& ev = s.dec.eigenvalues;
  const int count = std::min<int>(c.spectral_eigencount, static_cast<int>(ev.size()));
  Table t{"brox.spectrum/1", {"index", "eigenvalue"}};
  for (int i = 0; i < count; ++i) {
    t.add(i + 1, ev[i]);
    o.metric(n, c.grid_M, 0, "lambda_" + std::to_string(i + 1), ev[i]);
  }
  o.tables["spectrum.csv"] = std::move(t);
  const double e1 = s.dec.e1_constancy(static_cast<std::size_t>(c.spectral_points));
  o.metric(n, c.grid_M, 0, "gap", s.dec.gap);
  o.check("lambda1_abs", std::abs(ev[0]), "<=", tol.eigen_zero);
  o.check("gap", s.dec.gap, ">", 0.0);
  o.check("e1_constancy", e1, "<=", tol.e1_constancy);
  if (c.noise_flat) {
    const double ref[5] = {0.0, -0.5, -0.5, -2.0, -2.0};
    double err = 0;
    for (int i = 0; i < std::min<int>(5, static_cast<int>(ev.size())); ++i) err = std::max(err, std::abs(ev[i] - ref[i]));
    o.check("flat_spectrum_max_error", err, "<=", tol.flat_spectrum);
  }
  o.extra["weight_tail"] = s.gal.weight.tail;
  o.extra["weight_band"] = s.gal.weight.band();
  return o;
}

Outcome run_heat_kernel(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("heat-kernel", seed);
  const Tolerances tol = c.tolerances();
  const int n = c.spectral_n;
  const Spectral s = spectral_at(c, seed, n, true);
  const std::size_t P = kernel_points(c, s);
  o.extra["points"] = P;
  std::vector<double> ts = c.spectral_times;
  std::sort(ts.begin(), ts.end());
  Table t{"brox.heat_kernel/1", {"t", "min_value", "row_sum_defect", "detailed_balance_defect"}};
  double min_v = std::numeric_limits<double>::infinity(), rs = 0, db = 0;
  std::map<double, HeatKernel> kernels;
  for (double tt : ts) {
    const HeatKernel p = heat_kernel_eigen(s.dec, tt, P);
    const double dbi = detailed_balance_defect(p, s.gal.weight);
    t.add(tt, p.min_value(), p.row_sum_defect(), dbi);
    o.metric(n, c.grid_M, tt, "min_value", p.min_value());
    o.metric(n, c.grid_M, tt, "row_sum_defect", p.row_sum_defect());
    o.metric(n, c.grid_M, tt, "detailed_balance_defect", dbi);
    min_v = std::min(min_v, p.min_value());
    rs = std::max(rs, p.row_sum_defect());
    db = std::max(db, dbi);
    kernels.emplace(tt, p);
  }
  o.tables["heat_kernel.csv"] = std::move(t);
  o.check("kernel_min", min_v, ">", 0.0);
  o.check("row_sum_defect", rs, "<=", tol.row_sum);
  o.check("detailed_balance_defect", db, "<=", tol.detailed_balance);
  if (ts.size() >= 2) {
    const HeatKernel pst = heat_kernel_eigen(s.dec, ts[0] + ts[1], P);
    const double ck = chapman_kolmogorov_defect(kernels.at(ts[0]), kernels.at(ts[1]), pst);
    o.metric(n, c.grid_M, ts[0] + ts[1], "chapman_kolmogorov_defect", ck);
    o.check("chapman_kolmogorov_defect", ck, "<=", tol.chapman_kolmogorov);
  }
  // Backward-Euler resolvent products against the spectral semigroup.
  const Eigen::MatrixXd exact = semigroup_matrix(s.dec, s.gal, ts[0]);
  Table rp{"brox.resolvent_power/1", {"steps", "error", "ratio"}};
  double prev = 0;
  for (int steps : {64, 128, 256}) {
    const double err = (resolvent_power_matrix(s.gal, ts[0], steps, c.generator_c_shift) - exact).norm();
    const double ratio = prev > 0 ? prev / err : 0.0;
    rp.add(steps, err, ratio);
    if (prev > 0) o.check_in("resolvent_power_halving[steps=" + std::to_string(steps) + "]", ratio, 1.8, 2.2);
    prev = err;
  }
  o.tables["resolvent_power.csv"] = std::move(rp);
  return o;
}

Outcome run_gaussian_fit(const ExperimentConfig& c, std::uint64_t seed, const Context&) {
  Outcome o = start("gaussian-fit", seed);
  const std::vector<double> ts = log_spaced(c.spectral_t_min, c.spectral_t_max, c.spectral_t_count);
  std::vector<int> levels = c.spectral_levels;
  std::sort(levels.begin(), levels.end());
  Table t{"brox.gaussian_fit/1", {"n", "points", "c_lower", "c_upper", "theta_c_lower", "theta_c_upper"}};
  double lo_min = INFINITY, lo_max = 0, up_min = INFINITY, up_max = 0;
  bool finite = true;
  for (int n : levels) {
    const Spectral s = spectral_at(c, seed, n, true);
    const std::size_t P = kernel_points(c, s);
    const std::vector<std::size_t> rows{0, P / 4, P / 2, 3 * P / 4};
    std::vector<HeatKernel> ks;
    for (double tt : ts) ks.push_back(heat_kernel_eigen(s.dec, tt, P, rows));
    const GaussianFit fit = gaussian_bound_fit(ks);
    const GaussianFit theta = gaussian_bound_fit_flat(ks);
    t.add(n, P, fit.c_lower, fit.c_upper, theta.c_lower, theta.c_upper);
    o.metric(n, c.grid_M, 0, "c_lower", fit.c_lower);
    o.metric(n, c.grid_M, 0, "c_upper", fit.c_upper);
    finite = finite && fit.finite();
    lo_min = std::min(lo_min, fit.c_lower);
    lo_max = std::max(lo_max, fit.c_lower);
    up_min = std::min(up_min, fit.c_upper);
    up_max = std::max(up_max, fit.c_upper);
    if (c.noise_flat) {
      const double dl = std::abs(fit.c_lower / theta.c_lower - 1), du = std::abs(fit.c_upper / theta.c_upper - 1);
      o.check("flat_theta_rel_error[n=" + std::to_string(n) + "]", std::max(dl, du), "<=", 0.1);
    }
  }
  o.tables["gaussian_fit.csv"] = std::move(t);
  o.check("constants_finite", finite ? 1.0 : 0.0, ">=", 1.0);
  o.check("c_lower_spread", lo_max / lo_min, "<=", 2.0);
  o.check("c_upper_spread", up_max / up_min, "<=", 2.0);
  return o;
}

Outcome run_invariant_measure(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("invariant-measure", seed);
  const Tolerances tol = c.tolerances();
  const int n = c.mc_n;
  const PeriodicGrid g = grid_of(c);
  const FourierField xi = truncate(noise_of(c, seed), n, g);
  const InvariantMeasure im = invariant_measure(xi, static_cast<std::size_t>(c.spectral_points));
  o.metric(n, c.grid_M, 0, "adjoint_residual", im.adjoint_residual);
  o.metric(n, c.grid_M, 0, "stationarity", im.stationarity);
  o.check("adjoint_residual", im.adjoint_residual, "<=", tol.adjoint);
  o.check("stationarity", im.stationarity, "<=", tol.adjoint);

  const Spectral s = spectral_at(c, seed, n);
  const double gap = s.dec.gap;
  const double dt = mc_dt(c, xi);
  const double burn = c.mc_burn_in > 0 ? c.mc_burn_in : ceil_to(5.0 / gap, record_unit);
  const double T = c.mc_T > 0 ? c.mc_T : ceil_to(20.0 / gap, record_unit);
  if (!(T > burn)) throw ConfigError("mc.T: must exceed mc.burn_in");
  SimulationPlan coarse = base_plan(c, ctx, dt);
  coarse.T = T;
  coarse.stride = stride_for(c, dt);
  SimulationPlan fine = coarse;
  fine.dt = dt / 2;
  fine.stride = 2 * coarse.stride;
  const PathEnsemble ec = simulate_em(xi, coarse);
  const PathEnsemble ef = simulate_em(xi, fine);
  const BootstrapPlan boot{static_cast<std::size_t>(c.mc_bootstrap), c.master_seed};
  const OccupationReport r = occupation_extrapolated(ec, ef, s.gal.weight, burn, static_cast<std::size_t>(c.mc_bins), boot);

  Table t{"brox.occupation/1", {"bin", "mu", "histogram"}};
  for (std::size_t b = 0; b < r.bins; ++b) t.add(static_cast<int>(b), r.mu[b], r.histogram[b]);
  o.tables["occupation.csv"] = std::move(t);
  o.metric(n, c.grid_M, 0, "tv", r.tv);
  o.metric(n, c.grid_M, 0, "tv_z", r.z());
  o.metric(n, c.grid_M, 0, "samples", static_cast<double>(r.samples));
  o.check("occupation_tv_z", r.z(), "<=", tol.z_max);
  o.extra["dt"] = dt;
  o.extra["T"] = T;
  o.extra["burn_in"] = burn;
  o.extra["gap"] = gap;
  o.extra["samples"] = r.samples;
  o.extra["stride"] = coarse.stride;
  return o;
}

Outcome run_simulate(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("simulate", seed);
  const int n = c.mc_n;
  const FourierField xi = truncate(noise_of(c, seed), n, grid_of(c));
  const double dt = mc_dt(c, xi);
  SimulationPlan p = base_plan(c, ctx, dt);
  p.T = c.mc_T > 0 ? c.mc_T : 1.0;
  p.stride = stride_for(c, dt);
  const PathEnsemble e = simulate_em(xi, p);
  Outcome::Matrix m{"ensemble.bin", e.n_paths(), e.records(), e.positions,
                    {{"n", n}, {"dt", dt}, {"T", p.T}, {"stride", p.stride}, {"x0", p.x0}, {"master_seed", p.master_seed}}};
  o.matrices.push_back(std::move(m));
  Table t{"brox.ensemble_moments/1", {"t", "mean_unwrapped", "msd"}};
  for (std::size_t r = 0; r < e.records(); ++r) {
    double s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
      const double d = e.at(i, r) - p.x0;
      s1 += d;
      s2 += d * d;
    }
    t.add(e.time(r), s1 / e.n_paths(), s2 / e.n_paths());
  }
  o.tables["moments.csv"] = std::move(t);
  bool finite = std::all_of(e.positions.begin(), e.positions.end(), [](double x) { return std::isfinite(x); });
  o.check("positions_finite", finite ? 1.0 : 0.0, ">=", 1.0);
  o.extra["dt"] = dt;
  return o;
}

Outcome run_mixing(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("mixing", seed);
  const Tolerances tol = c.tolerances();
  const int n = c.mc_n;
  const Spectral s = spectral_at(c, seed, n);
  const double gap = s.dec.gap;
  const std::size_t P = kernel_points(c, s);
  const std::vector<double> window = mixing_window(s.dec);
  const MixingFit kf = mixing_rate_kernel(s.dec, window, P);
  const double rel = std::abs(-kf.rate - gap) / gap;

  // Monte Carlo route from the start where e₂ is largest.
  const FourierField xi = truncate(noise_of(c, seed), n, grid_of(c));
  const double dt = mc_dt(c, xi);
  const double unit = 1.0 / 8;
  std::vector<double> times;
  for (double t : window) {
    const double tt = ceil_to(t, unit);
    if (times.empty() || tt > times.back()) times.push_back(tt);
  }
  SimulationPlan p = base_plan(c, ctx, dt);
  p.x0 = argmax_abs_e2(s.dec, P);
  p.T = times.back();
  p.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(unit / dt)));
  const PathEnsemble e = simulate_em(xi, p);
  const BootstrapPlan boot{static_cast<std::size_t>(c.mc_bootstrap), c.master_seed};
  const MixingMC mc = mixing_rate_mc(e, s.dec, times, static_cast<std::size_t>(c.mc_bins), boot);
  const double mrel = std::abs(-mc.fit.rate - gap) / gap;

  Table fit{"brox.mixing_fit/1", {"route", "C", "lambda", "gap", "rel_error"}};
  fit.add(std::string("kernel"), std::exp(kf.log_C), -kf.rate, gap, rel);
  fit.add(std::string("monte_carlo"), std::exp(mc.fit.log_C), -mc.fit.rate, gap, mrel);
  o.tables["mixing.csv"] = std::move(fit);
  Table tv{"brox.mixing_tv/1", {"t", "kernel_tv", "mc_tv", "mc_se", "z"}};
  for (std::size_t i = 0; i < mc.times.size(); ++i)
    tv.add(mc.times[i], mc.kernel_tv[i], mc.tv[i], mc.tv_se[i],
           mc.tv_se[i] > 0 ? (mc.tv[i] - mc.kernel_tv[i]) / mc.tv_se[i] : 0.0);
  o.tables["mixing_tv.csv"] = std::move(tv);
  o.metric(n, c.grid_M, 0, "gap", gap);
  o.metric(n, c.grid_M, 0, "kernel_rate", -kf.rate);
  o.metric(n, c.grid_M, 0, "mc_rate", -mc.fit.rate);
  o.metric(n, c.grid_M, 0, "mc_max_abs_z", mc.max_abs_z());
  o.check("kernel_rate_rel_error", rel, "<=", tol.gap_rate);
  o.check("mc_max_abs_z", mc.max_abs_z(), "<=", tol.z_max);
  o.extra["x0"] = p.x0;
  o.extra["dt"] = dt;
  return o;
}

Outcome run_holder(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("holder", seed);
  const int n = c.mc_n;
  const FourierField xi = truncate(noise_of(c, seed), n, grid_of(c));
  const double dt = mc_dt(c, xi);
  SimulationPlan p = base_plan(c, ctx, dt);
  p.T = c.mc_T > 0 ? c.mc_T : 4000 * dt;
  p.stride = 1;
  const HolderFit h = holder_exponent(simulate_em(xi, p));
  Table t{"brox.holder/1", {"lag", "msd"}};
  for (std::size_t i = 0; i < h.lags.size(); ++i) t.add(h.lags[i], h.msd[i]);
  o.tables["holder.csv"] = std::move(t);
  o.metric(n, c.grid_M, 0, "exponent", h.exponent);
  o.metric(n, c.grid_M, 0, "exponent_se", h.exponent_se);
  o.check_in("holder_exponent", h.exponent, c.tolerances().holder_lo, c.tolerances().holder_hi);
  o.extra["dt"] = dt;
  o.extra["T"] = p.T;
  return o;
}

Outcome run_martingale(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("martingale-test", seed);
  const int n = c.mc_n;
  const PeriodicGrid g = grid_of(c);
  EnhancedNoise Xi = enhance(noise_of(c, seed), n, c.noise_alpha, g);
  const int N = c.generator_N > 0 ? c.generator_N : estimate_N_Xi(Xi);
  const GeneratorHandle H(std::move(Xi), N, c.generator_c_shift, LevelPolicy::clamp);
  std::vector<MartingaleProbe> probes;
  int i = 0;
  for (const auto& us : probes_of(c, g)) {
    const FourierField u = H.gamma(us, gamma_options(c)).u;
    probes.push_back({"probe" + std::to_string(i++), u, apply_L_untruncated(u, H.Xi().xi), 0.0});
  }
  const auto triples = default_triples();
  double T = 0;
  for (const auto& tr : triples) T = std::max(T, tr.t);
  const double dt = mc_dt(c, H.Xi().xi);
  SimulationPlan p = base_plan(c, ctx, dt);
  p.T = T;
  const MartingaleReport r = martingale_test(H.Xi().xi, probes, p, triples);
  Table t{"brox.martingale/1", {"probe", "s", "t", "functional", "mean", "se", "z"}};
  for (std::size_t a = 0; a < r.probes.size(); ++a)
    for (std::size_t b = 0; b < r.triples.size(); ++b)
      t.add(r.probes[a], r.triples[b].s, r.triples[b].t, to_string(r.triples[b].F), r.mean[a][b], r.se[a][b], r.z[a][b]);
  o.tables["martingale.csv"] = std::move(t);
  o.metric(n, c.grid_M, 0, "max_abs_z", r.max_abs_z());
  o.check("max_abs_z", r.max_abs_z(), "<=", c.tolerances().z_max);
  o.extra["N"] = N;
  o.extra["dt"] = dt;
  o.extra["probe_dictionary"] = {{"seed", c.generator_probe_seed}, {"count", c.generator_probes}, {"decay", probe_decay}};
  return o;
}

Outcome run_fdd(const ExperimentConfig& c, std::uint64_t seed, const Context& ctx) {
  Outcome o = start("fdd-check", seed);
  const int n = c.mc_n;
  const Spectral s = spectral_at(c, seed, n);
  const double gap = s.dec.gap;
  const FourierField xi = truncate(noise_of(c, seed), n, grid_of(c));
  const double dt = mc_dt(c, xi);
  const double unit = 1.0 / 8;
  const double t1 = ceil_to(0.5 / gap, unit), t2 = std::max(ceil_to(1.0 / gap, unit), t1 + unit);
  SimulationPlan p = base_plan(c, ctx, dt);
  p.x0 = argmax_abs_e2(s.dec, kernel_points(c, s));
  p.T = t2;
  p.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(unit / dt)));
  const PathEnsemble e = simulate_em(xi, p);
  const std::vector<Arc> halves{{0.0, M_PI}, {M_PI, M_PI}};
  const FddReport r = fdd_check(e, s.dec, s.gal, {t1, t2}, {halves, halves});
  Table t{"brox.fdd/1", {"cell", "observed", "expected"}};
  for (std::size_t i = 0; i < r.observed.size(); ++i) t.add(static_cast<int>(i), r.observed[i], r.expected[i]);
  o.tables["fdd.csv"] = std::move(t);
  o.metric(n, c.grid_M, 0, "chi2", r.chi2);
  o.metric(n, c.grid_M, 0, "p_value", r.p_value);
  o.check("fdd_p_value", r.p_value, ">=", c.tolerances().fdd_p_min);
  o.extra["times"] = {t1, t2};
  o.extra["x0"] = p.x0;
  return o;
}

// ---------------------------------------------------------------- report helpers

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double to_num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r{
      {"sample-noise", run_sample_noise},   {"enhance", run_enhance},
      {"gamma", run_gamma},                 {"generator-check", run_generator_check},
      {"resolvent", run_resolvent},         {"spectrum", run_spectrum},
      {"heat-kernel", run_heat_kernel},     {"gaussian-fit", run_gaussian_fit},
      {"invariant-measure", run_invariant_measure}, {"simulate", run_simulate},
      {"mixing", run_mixing},               {"holder", run_holder},
      {"martingale-test", run_martingale},  {"fdd-check", run_fdd},
  };
  return r;
}

Outcome run(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed, const Context& ctx) {
  const auto& r = registry();
  const auto it = r.find(command);
  if (it == r.end()) throw ConfigError("unknown subcommand " + command);
  cfg.validate();
  return it->second(cfg, seed, ctx);
}

void write_run(const std::string& dir, const Outcome& out, const ExperimentConfig& cfg, double seconds) {
  fs::create_directories(dir);
  io::json files = io::json::array();
  io::write_csv(dir + "/metrics.csv", out.metrics);
  files.push_back("metrics.csv");
  for (const auto& [name, t] : out.tables) {
    io::write_csv(dir + "/" + name, t);
    files.push_back(name);
  }
  for (const auto& [name, f] : out.fields) {
    io::write_field(dir + "/" + name, f, {{"command", out.command}, {"seed", out.seed}});
    files.push_back(name);
  }
  for (const auto& m : out.matrices) {
    io::write_matrix(dir + "/" + m.name, m.rows, m.cols, m.data, m.meta);
    files.push_back(m.name);
  }
  const Tolerances t = cfg.tolerances();
  io::json checks = io::json::array();
  for (const auto& c : out.checks) {
    io::json j{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}, {"pass", c.pass}};
    if (c.relation == "in") j["threshold_hi"] = c.threshold_hi;
    checks.push_back(j);
  }
  io::json manifest{
      {"schema", "brox.manifest/1"},
      {"command", out.command},
      {"seed", out.seed},
      {"master_seed", cfg.master_seed},
      {"config", cfg.to_map()},
      {"tolerances",
       {{"exactness", t.exactness}, {"round_trip", t.round_trip}, {"gamma_one", t.gamma_one}, {"form", t.form},
        {"eigen_zero", t.eigen_zero}, {"e1_constancy", t.e1_constancy}, {"flat_spectrum", t.flat_spectrum},
        {"row_sum", t.row_sum}, {"chapman_kolmogorov", t.chapman_kolmogorov}, {"detailed_balance", t.detailed_balance},
        {"adjoint", t.adjoint}, {"resolvent_spread", t.resolvent_spread}, {"gap_rate", t.gap_rate}, {"z_max", t.z_max},
        {"holder_lo", t.holder_lo}, {"holder_hi", t.holder_hi}, {"fdd_p_min", t.fdd_p_min}}},
      {"versions",
       {{"brox", version_string()},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"fftw", std::string(fftw_version)},
        {"compiler", std::string(__VERSION__)}}},
      {"checks", checks},
      {"ok", out.ok()},
      {"outputs", files},
      {"extra", out.extra},
      {"seconds", seconds},
  };
  io::write_json(dir + "/manifest.json", manifest);
}

io::json report(const std::string& root) {
  std::vector<fs::path> manifests;
  if (fs::is_directory(root))
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  if (manifests.empty())
    throw Error("report: no run manifests under " + root +
                "; expected <dir>/<command>/seed-<seed>/manifest.json as written by a brox subcommand");
  std::sort(manifests.begin(), manifests.end());

  using Key = std::tuple<std::string, int, int, double, std::string>;  // command, n, M, t, metric
  std::map<Key, std::vector<double>> groups;
  std::map<std::string, std::pair<int, int>> per_command;  // runs, passed
  for (const auto& m : manifests) {
    const io::json j = io::read_json(m.string());
    const std::string cmd = j.at("command").get<std::string>();
    auto& pc = per_command[cmd];
    ++pc.first;
    if (j.at("ok").get<bool>()) ++pc.second;
    const fs::path csv = m.parent_path() / "metrics.csv";
    if (!fs::exists(csv)) throw Error("report: " + m.string() + " has no metrics.csv beside it");
    const Table t = io::read_csv(csv.string());
    const std::size_t ic = t.column("command"), in = t.column("n"), iM = t.column("M"), it = t.column("t"),
                      im = t.column("metric"), iv = t.column("value");
    for (const auto& r : t.rows)
      groups[{r[ic], std::stoi(r[in]), std::stoi(r[iM]), to_num(r[it]), r[im]}].push_back(to_num(r[iv]));
  }

  Table agg{"brox.aggregate/1", {"command", "n", "M", "t", "metric", "count", "mean", "median", "sd", "ci95_lo", "ci95_hi"}};
  for (const auto& [k, v] : groups) {
    const double cnt = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / cnt;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (cnt - 1)) : 0.0;
    const double hw = 1.96 * sd / std::sqrt(cnt);
    agg.add(std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), std::get<4>(k), static_cast<int>(v.size()),
            mean, median(v), sd, mean - hw, mean + hw);
  }
  io::write_csv(root + "/aggregate.csv", agg);

  io::json summary{{"schema", "brox.summary/1"}, {"runs", manifests.size()}};
  io::json cmds = io::json::object();
  for (const auto& [cmd, rp] : per_command) cmds[cmd] = {{"runs", rp.first}, {"passed", rp.second}};
  summary["commands"] = cmds;

  // Convergence table of the enhance sweep: per (M, n) seed-median distance.
  Table conv{"brox.convergence/1", {"M", "n", "seeds", "median_distance", "monotone"}};
  bool any = false, monotone = true;
  int last_M = -1;
  double prev = 0;
  for (const auto& [k, v] : groups) {
    if (std::get<0>(k) != "enhance" || std::get<4>(k) != "distance") continue;
    const double med = median(v);
    const bool first = std::get<2>(k) != last_M;
    const bool dec = first || med < prev;
    monotone = monotone && dec;
    conv.add(std::get<2>(k), std::get<1>(k), static_cast<int>(v.size()), med, dec ? 1 : 0);
    last_M = std::get<2>(k);
    prev = med;
    any = true;
  }
  if (any) {
    io::write_csv(root + "/convergence.csv", conv);
    summary["enhance_median_strictly_decreasing"] = monotone;
  }
  io::write_json(root + "/summary.json", summary);
  return summary;
}

}  // namespace brox::exp
