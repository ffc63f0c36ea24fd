// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--only 3,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brox/config.hpp"
#include "brox/errors.hpp"
#include "brox/experiments.hpp"
#include "brox/noise.hpp"
#include "brox/spectrum.hpp"
#include "brox/weight.hpp"

using namespace brox;

namespace {

constexpr int kSeeds = 50;
constexpr std::uint64_t kMcSeed = 6;  // environment of the Monte Carlo criteria

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double check_value(const exp::Outcome& o, const std::string& name) {
  for (const auto& c : o.checks)
    if (c.name == name) return c.value;
  throw brox::Error("outcome of " + o.command + " has no check " + name);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ExperimentConfig fine_grid() {
  ExperimentConfig c;
  c.grid_M = 2048;
  c.grid_K = 682;
  c.noise_K_max = 512;
  return c;
}

ExperimentConfig mc_config(int n, double dt_fraction, int paths) {
  ExperimentConfig c;
  c.mc_n = n;
  c.mc_dt_fraction = dt_fraction;
  c.mc_n_paths = paths;
  return c;
}

// ---------------------------------------------------------------- criteria

Verdict renormalization() {
  const PeriodicGrid g(1024, 341);
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d = "max|z| over 1024 points, 1e4 seeds:";
  for (int n : {16, 32, 64, 128, 256}) {
    const double z = estimate_renormalization(1, 10000, n, g).max_abs_z();
    ok = ok && z <= 3.0;
    d += fmt(" n=%d %.2f", n, z);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  d += fmt("; %.1f s (<= 60)", secs);
  return {ok && secs <= 60.0, d};
}

Verdict enhanced_convergence() {
  ExperimentConfig c = fine_grid();
  c.noise_alpha = 1.2;
  std::map<int, std::vector<double>> dist;
  for (int s = 1; s <= kSeeds; ++s) {
    const exp::Outcome o = exp::run("enhance", c, s);
    const auto& t = o.tables.at("enhance.csv");
    for (const auto& r : t.rows) dist[std::stoi(r[t.column("n")])].push_back(std::stod(r[t.column("distance")]));
  }
  bool ok = true;
  double prev = INFINITY;
  std::string d = "median |Xi_2n - Xi_n|:";
  for (const auto& [n, v] : dist) {
    const double m = median(v);
    ok = ok && m < prev;
    prev = m;
    d += fmt(" n=%d %.3f", n, m);
  }
  return {ok && dist.size() == 5, d + fmt(" (%d seeds, M=2048, alpha=1.2)", kSeeds)};
}

struct GeneratorSweep {
  double exactness = 0, form_min = INFINITY, symmetry = 0;
};

const GeneratorSweep& generator_sweep() {
  static const GeneratorSweep sw = [] {
    GeneratorSweep r;
    const ExperimentConfig c;
    for (int s = 1; s <= kSeeds; ++s) {
      const exp::Outcome o = exp::run("generator-check", c, s);
      r.exactness = std::max(r.exactness, check_value(o, "exactness_max_rel_error"));
      r.form_min = std::min(r.form_min, check_value(o, "form_min"));
      r.symmetry = std::max(r.symmetry, check_value(o, "form_symmetry_defect"));
    }
    return r;
  }();
  return sw;
}

Verdict exactness() {
  const auto& s = generator_sweep();
  return {s.exactness <= 1e-9,
          fmt("max relative error %.2e (<= 1e-9), %d seeds x 5 probes x levels 16..256", s.exactness, kSeeds)};
}

Verdict gamma_pair() {
  ExperimentConfig c = fine_grid();
  c.noise_levels = {32, 64, 128, 256, 512};
  double rt = 0, g1 = 0;
  int bad_steps = 0;
  std::map<int, std::vector<double>> dens;
  for (int s = 1; s <= kSeeds; ++s) {
    const exp::Outcome o = exp::run("gamma", c, s);
    rt = std::max(rt, check_value(o, "round_trip_max"));
    g1 = std::max(g1, check_value(o, "gamma_one_error"));
    bad_steps += static_cast<int>(check_value(o, "density_increasing_steps"));
    const auto& t = o.tables.at("density.csv");
    for (const auto& r : t.rows) dens[std::stoi(r[0])].push_back(std::stod(r[1]));
  }
  std::string d = fmt("round trip %.1e (<= 1e-10), |G1-1| %.1e (<= 1e-12), increasing density steps %d; median H1 error:",
                      rt, g1, bad_steps);
  for (const auto& [n, v] : dens) d += fmt(" n=%d %.2e", n, median(v));
  return {rt <= 1e-10 && g1 <= 1e-12 && bad_steps == 0, d};
}

Verdict form() {
  const auto& s = generator_sweep();
  return {s.form_min >= -1e-9 && s.symmetry <= 1e-9,
          fmt("min form %.3e (>= -1e-9), symmetry defect %.2e (<= 1e-9)", s.form_min, s.symmetry)};
}

Verdict resolvent() {
  const ExperimentConfig c;
  double worst = 0;
  for (int s = 1; s <= kSeeds; ++s) worst = std::max(worst, check_value(exp::run("resolvent", c, s), "ratio_spread"));
  return {worst <= 10.0, fmt("worst max/min of error/|Xi-Xi_n| across n=16..128: %.2f (<= 10), %d seeds", worst, kSeeds)};
}

Verdict spectrum() {
  ExperimentConfig c;
  double l1 = 0, e1 = 0, gap = INFINITY;
  for (int s = 1; s <= 100; ++s) {
    const exp::Outcome o = exp::run("spectrum", c, s);
    l1 = std::max(l1, check_value(o, "lambda1_abs"));
    e1 = std::max(e1, check_value(o, "e1_constancy"));
    gap = std::min(gap, check_value(o, "gap"));
  }
  c.noise_flat = true;
  const double flat = check_value(exp::run("spectrum", c, 1), "flat_spectrum_max_error");
  return {l1 <= 1e-9 && e1 <= 1e-8 && gap > 0 && flat <= 1e-10,
          fmt("100 seeds n=16: max|l1| %.1e, e1 constancy %.1e, min gap %.3g; flat error %.1e", l1, e1, gap, flat)};
}

Verdict heat_kernel() {
  const ExperimentConfig c;
  double mn = INFINITY, rs = 0, ck = 0, db = 0, hlo = INFINITY, hhi = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    const exp::Outcome o = exp::run("heat-kernel", c, s);
    mn = std::min(mn, check_value(o, "kernel_min"));
    rs = std::max(rs, check_value(o, "row_sum_defect"));
    ck = std::max(ck, check_value(o, "chapman_kolmogorov_defect"));
    db = std::max(db, check_value(o, "detailed_balance_defect"));
    for (const auto& ch : o.checks)
      if (ch.name.rfind("resolvent_power_halving", 0) == 0) {
        hlo = std::min(hlo, ch.value);
        hhi = std::max(hhi, ch.value);
      }
  }
  const bool ok = mn > 0 && rs <= 1e-8 && ck <= 1e-8 && db <= 1e-8 && hlo >= 1.8 && hhi <= 2.2;
  return {ok, fmt("%d seeds: min p %.1e, row sums %.1e, CK %.1e, detailed balance %.1e, error ratio per doubling [%.3f, %.3f]",
                  kSeeds, mn, rs, ck, db, hlo, hhi)};
}

Verdict gaussian() {
  ExperimentConfig c;
  int fails = 0;
  double worst_lo = 0, worst_up = 0;
  std::string failed;
  for (int s = 1; s <= kSeeds; ++s) {
    const exp::Outcome o = exp::run("gaussian-fit", c, s);
    worst_lo = std::max(worst_lo, check_value(o, "c_lower_spread"));
    worst_up = std::max(worst_up, check_value(o, "c_upper_spread"));
    if (!o.ok()) {
      ++fails;
      failed += " " + std::to_string(s);
    }
  }
  c.noise_flat = true;
  c.spectral_levels = {16};
  const exp::Outcome f = exp::run("gaussian-fit", c, 1);
  const double flat = check_value(f, "flat_theta_rel_error[n=16]");
  std::string d = fmt("n=16,32,64, t in [0.005,0.1]: %d/%d seeds within 2x (worst spread lower %.2f, upper %.2f); flat vs theta %.3f",
                      kSeeds - fails, kSeeds, worst_lo, worst_up, flat);
  if (fails) d += "; failing seeds:" + failed;
  return {fails == 0 && f.ok(), d};
}

Verdict invariant_measure_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const PeriodicGrid g(1024, 341);
  double adj = 0;
  for (int s = 1; s <= kSeeds; ++s)
    adj = std::max(adj, brox::invariant_measure(truncate(sample_noise(s, 256), 16, g), 512).adjoint_residual);
  const exp::Outcome o = exp::run("invariant-measure", mc_config(8, 1.0, 1000), kMcSeed);
  const double z = check_value(o, "occupation_tv_z");
  const auto samples = o.extra.at("samples").get<std::size_t>();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {adj <= 1e-9 && z <= 3.0 && samples >= 1000000 && secs <= 300,
          fmt("adjoint residual %.1e (%d seeds); MC seed %d: TV z %.2f at %zu samples; %.0f s", adj, kSeeds,
              static_cast<int>(kMcSeed), z, samples, secs)};
}

Verdict mixing() {
  double worst = 0;
  const PeriodicGrid g(1024, 341);
  for (int s = 1; s <= kSeeds; ++s) {
    const WeightSpectrum w = weight_coefficients(potential(sample_noise(s, 256), 16, g));
    const WeightedGalerkin gal = assemble_weighted(w, std::max(128, w.band()));
    const SpectralDecomposition dec = eigendecompose(gal, 16);
    std::size_t P = 512;
    while (P < 2 * static_cast<std::size_t>(gal.basis_modes) + static_cast<std::size_t>(w.band()) + 1) P *= 2;
    const MixingFit f = mixing_rate_kernel(dec, mixing_window(dec), P);
    worst = std::max(worst, std::abs(-f.rate - dec.gap) / dec.gap);
  }
  ExperimentConfig c = mc_config(8, 1.0, 20000);
  c.mc_bins = 32;
  const exp::Outcome o = exp::run("mixing", c, kMcSeed);
  const double z = check_value(o, "mc_max_abs_z");
  const auto& fit = o.tables.at("mixing.csv");
  const double mc_rel = std::stod(fit.rows[1][fit.column("rel_error")]);
  return {worst <= 0.15 && o.ok(),
          fmt("kernel rate vs gap worst rel error %.3f (<= 0.15, %d seeds n=16); MC seed %d: max|z| %.2f vs kernel TV, "
              "MC rate error %.3f",
              worst, kSeeds, static_cast<int>(kMcSeed), z, mc_rel)};
}

Verdict holder() {
  const exp::Outcome o = exp::run("holder", mc_config(64, 0.25, 1000), kMcSeed);
  const double h = check_value(o, "holder_exponent");
  return {o.ok(), fmt("exponent %.3f in [0.45, 0.55] (1000 paths, n=64)", h)};
}

Verdict martingale() {
  ExperimentConfig c = mc_config(64, 0.25, 100000);
  const exp::Outcome o = exp::run("martingale-test", c, kMcSeed);
  return {o.ok(), fmt("max|z| %.2f over 5 probes x 4 functionals, 1e5 paths, n=64, N=%d", check_value(o, "max_abs_z"),
                      o.extra.at("N").get<int>())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> sel(only.begin(), only.end());

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"renormalization vanishes", renormalization},
      {"enhanced-noise convergence", enhanced_convergence},
      {"exactness oracle", exactness},
      {"Gamma/Phi inverse pair", gamma_pair},
      {"form nonnegative and symmetric", form},
      {"resolvent convergence", resolvent},
      {"spectrum", spectrum},
      {"heat kernel", heat_kernel},
      {"Gaussian bounds", gaussian},
      {"invariant measure", invariant_measure_check},
      {"exponential mixing", mixing},
      {"path regularity", holder},
      {"martingale problem", martingale},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!sel.empty() && !sel.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed ? 1 : 0;
}
