#pragma once

// Experiment configuration: a flat key = value text format.
//
//   # comment
//   grid.M = 1024
//   noise.levels = 16, 32, 64
//
// Unknown keys and malformed values raise ConfigError naming the field. Doubles are
// written in shortest round-trip form, so a config survives a write/read cycle bit-exactly.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace brox {

enum class ToleranceProfile { standard, strict };

/// Thresholds of the declared invariants; `strict` tightens the numerical ones.
struct Tolerances {
  double exactness = 1e-9;        // expanded vs direct generator, relative
  double round_trip = 1e-10;      // Γ(Φu) vs u
  double gamma_one = 1e-12;       // Γ1 - 1
  double form = 1e-9;             // nonnegativity floor and symmetry defect
  double eigen_zero = 1e-9;       // |λ₁|
  double e1_constancy = 1e-8;
  double flat_spectrum = 1e-10;
  double row_sum = 1e-8;
  double chapman_kolmogorov = 1e-8;
  double detailed_balance = 1e-8;
  double adjoint = 1e-9;
  double resolvent_spread = 10.0;  // max/min of the convergence ratio
  double gap_rate = 0.15;          // relative mixing-rate error
  double z_max = 3.0;
  double holder_lo = 0.45, holder_hi = 0.55;
  double fdd_p_min = 1e-3;

  static Tolerances profile(ToleranceProfile p);
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;  // Monte Carlo path streams

  int grid_M = 1024;
  int grid_K = 341;

  std::uint64_t noise_seed = 1;   // environment
  int noise_seed_count = 1;       // consecutive environment seeds for sweeps
  int noise_K_max = 256;
  std::vector<int> noise_levels{16, 32, 64, 128, 256};
  double noise_alpha = 1.2;
  bool noise_flat = false;        // ξ = 0
  int noise_renorm_seeds = 0;     // sample-noise: seeds in the mean-zero check of ∇X₁·ξₙ (0: off)

  int generator_N = 0;            // 0: estimate N_Ξ
  double generator_c_shift = 1.0;
  double generator_gamma_tolerance = 1e-11;
  double generator_resolvent_tolerance = 1e-8;
  int generator_probes = 5;
  std::uint64_t generator_probe_seed = 777;

  int spectral_n = 16;
  std::vector<int> spectral_levels{16, 32, 64};  // gaussian-fit uniformity sweep
  int spectral_basis_modes = 128;
  double spectral_band_factor = 1.0;  // K_b raised to at least this multiple of the weight band (0: off)
  std::string spectral_kernel_basis = "ground_state";  // heat kernels and Gaussian fits: ground_state | fourier
  int spectral_eigencount = 8;
  int spectral_points = 512;
  std::vector<double> spectral_times{0.3, 0.6, 0.9};
  double spectral_t_min = 0.005;
  double spectral_t_max = 0.1;
  int spectral_t_count = 8;

  int mc_n = 8;
  double mc_dt = 0.0;             // 0: dt_fraction × stability bound
  double mc_dt_fraction = 1.0;
  double mc_T = 0.0;              // 0: derived from the spectral gap
  int mc_n_paths = 1000;
  double mc_burn_in = 0.0;        // 0: 5/gap
  int mc_stride = 0;              // 0: record every 1/32 time unit
  int mc_bins = 64;
  int mc_bootstrap = 200;
  double mc_x0 = 0.0;

  ToleranceProfile tolerance_profile = ToleranceProfile::standard;
  std::string output_dir;         // empty: $BROX_OUT_ROOT or ./runs

  Tolerances tolerances() const { return Tolerances::profile(tolerance_profile); }

  /// Throws ConfigError listing every violated field.
  void validate() const;
  /// Canonical text form (every key, fixed order).
  std::string to_text() const;
  /// Ordered key → canonical value map, as echoed into manifests.
  std::map<std::string, std::string> to_map() const;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  /// Applies one `key = value` assignment.
  void set(const std::string& key, const std::string& value);
  /// Documentation of every key: name, type, default.
  static std::string schema();
};

std::string format_double(double x);

}  // namespace brox
