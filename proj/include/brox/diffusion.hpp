#pragma once

// Quenched Euler–Maruyama simulation of dX = ξₙ(X)dt + dB and the statistics built on it:
// occupation vs the invariant measure, mixing, path regularity, martingale-problem
// z-scores and finite-dimensional distributions.
//
// Each path draws from its own stream (master seed, path index), so ensembles do not depend
// on path count or thread schedule. Paths live on ℝ; torus statistics wrap them.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brox/noise.hpp"
#include "brox/spectrum.hpp"
#include "brox/weight.hpp"

namespace brox {

/// ξₙ(x) = Σ_{|k|≤n} ξ_k e^{ikx} evaluated exactly at real points.
class Drift {
 public:
  explicit Drift(const FourierField& xi_n);
  double operator()(double x) const noexcept;
  int level() const noexcept { return static_cast<int>(c_.size()) - 1; }
  /// max |ξₙ| on a grid 16× finer than the band.
  double sup_norm() const;

 private:
  std::vector<cplx> c_;
};

/// 0.1 / (1 + ‖ξₙ‖²_∞).
double stable_dt(const FourierField& xi_n);

/// Periodic function tabulated on a power-of-two grid, evaluated by 4-point Lagrange
/// interpolation; `slope`·x is added for functions with a winding part.
class Tabulated {
 public:
  Tabulated() = default;
  Tabulated(const FourierField& f, std::size_t points, double slope = 0.0);
  double operator()(double x) const noexcept;

 private:
  std::vector<double> v_;
  double inv_h_ = 0.0;
  double slope_ = 0.0;
  std::size_t mask_ = 0;
};

struct SimulationPlan {
  double x0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t master_seed = 1;
  std::size_t stride = 1;  // record every `stride` steps
  unsigned threads = 1;
};

struct PathEnsemble {
  int n = 0;
  SimulationPlan plan;
  std::size_t steps = 0;  // Euler steps per path
  std::vector<double> positions;  // path-major: n_paths × records

  std::size_t n_paths() const noexcept { return plan.n_paths; }
  std::size_t records() const noexcept { return steps / plan.stride + 1; }
  double time(std::size_t r) const noexcept { return static_cast<double>(r * plan.stride) * plan.dt; }
  double at(std::size_t path, std::size_t r) const noexcept { return positions[path * records() + r]; }
  /// Record index of time t (must be a recorded time).
  std::size_t record_of(double t) const;
};

/// Number of Euler steps for horizon T (T/dt rounded; must be integral to 1e-9).
std::size_t step_count(double T, double dt);

/// Throws StabilityError when dt exceeds stable_dt.
PathEnsemble simulate_em(const FourierField& xi_n, const SimulationPlan& plan);
PathEnsemble simulate_em(const NoiseRealization& noise, int n, const PeriodicGrid& grid, const SimulationPlan& plan);

/// Runs `body(i)` for i in [0, count) on `threads` workers with static contiguous chunks.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

double wrap(double x) noexcept;

// ---------------------------------------------------------------------------
// Occupation

struct OccupationReport {
  std::size_t bins = 0;
  std::size_t samples = 0;
  std::vector<double> histogram;  // empirical (or extrapolated) bin probabilities
  std::vector<double> mu;         // exact μ bin probabilities
  double tv = 0.0;
  double ks = 0.0;
  double tv_null_mean = 0.0;  // bootstrap TV of resampled vs observed histogram
  double tv_null_se = 0.0;
  double tv_se = 0.0;         // bootstrap SE of the TV itself

  /// (tv - tv_null_mean) / tv_null_se: TV in units of its sampling-noise level.
  double z() const;
};

struct BootstrapPlan {
  std::size_t resamples = 200;
  std::uint64_t seed = 7;
};

/// Wrapped occupation of the records with time ≥ burn_in vs μ = e^{2Wₙ}/Z.
OccupationReport occupation_vs_mu(const PathEnsemble& ens, const WeightSpectrum& w, double burn_in,
                                  std::size_t bins = 64, const BootstrapPlan& boot = {});
/// Richardson-extrapolated histogram 2h_{fine} - h_{coarse} from two step sizes (dt, dt/2)
/// sharing path seeds; bootstrap resamples the same path indices in both.
OccupationReport occupation_extrapolated(const PathEnsemble& coarse, const PathEnsemble& fine, const WeightSpectrum& w,
                                         double burn_in, std::size_t bins = 64, const BootstrapPlan& boot = {});

// ---------------------------------------------------------------------------
// Mixing (Monte Carlo route)

struct MixingMC {
  std::vector<double> times;
  std::vector<double> tv;        // bias-corrected TV(law(X_t), μ) on bins
  std::vector<double> tv_se;
  std::vector<double> kernel_tv; // same binned TV from the heat kernel at x0
  MixingFit fit;                 // fit of the MC values

  /// max_t |tv - kernel_tv| / tv_se.
  double max_abs_z() const;
};

/// Times are record times of the ensemble (all paths started at plan.x0).
MixingMC mixing_rate_mc(const PathEnsemble& ens, const SpectralDecomposition& dec, const std::vector<double>& times,
                        std::size_t bins = 32, const BootstrapPlan& boot = {});

/// Binned law of X_t started at x0, from the eigen-expansion.
std::vector<double> kernel_bin_probabilities(const SpectralDecomposition& dec, double x0, double t, std::size_t bins);

// ---------------------------------------------------------------------------
// Path regularity

struct HolderFit {
  double exponent = 0.0;  // slope of log E|ΔX|² in log h, halved
  double exponent_se = 0.0;
  std::vector<double> lags;
  std::vector<double> msd;
};

/// Lags h ∈ [h_min, h_max] (defaults 4dt and T/100), log-spaced over recorded multiples.
HolderFit holder_exponent(const PathEnsemble& ens, double h_min = 0.0, double h_max = 0.0, int lag_count = 12);

// ---------------------------------------------------------------------------
// Martingale problem

enum class Functional { one, sin_s, cos_s, half_circle_mid };
std::string to_string(Functional f);

struct MartingaleTriple {
  double s = 0.0;
  double t = 0.0;
  Functional F = Functional::one;
};

/// The fixed test dictionary: four (s, t, F) triples.
std::vector<MartingaleTriple> default_triples();

/// u(x) = slope·x + periodic part, with 𝓛ₙu supplied by the caller.
struct MartingaleProbe {
  std::string label;
  FourierField u;
  FourierField Lu;
  double slope = 0.0;
};

struct MartingaleReport {
  std::vector<std::string> probes;
  std::vector<MartingaleTriple> triples;
  std::vector<std::vector<double>> mean;  // [probe][triple]
  std::vector<std::vector<double>> se;
  std::vector<std::vector<double>> z;
  std::size_t n_paths = 0;

  double max_abs_z() const;
};

/// Streams the Euler paths of `plan` (identical to simulate_em) and accumulates
/// E[(M_t - M_s) F] with M_t = u(X_t) - u(X_0) - ∫₀ᵗ 𝓛ₙu(X_r)dr (trapezoid rule).
/// u and 𝓛ₙu are tabulated on `table_points` nodes.
MartingaleReport martingale_test(const FourierField& xi_n, const std::vector<MartingaleProbe>& probes,
                                 const SimulationPlan& plan, const std::vector<MartingaleTriple>& triples,
                                 std::size_t table_points = 1 << 14);

// ---------------------------------------------------------------------------
// Finite-dimensional distributions

struct FddReport {
  std::vector<double> times;
  std::vector<std::vector<Arc>> cells;  // one arc per time for each cell
  std::vector<double> observed;         // counts
  std::vector<double> expected;         // n_paths · probability
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 1.0;

  /// (χ² - dof)/√(2 dof).
  double z() const;
};

/// Arcs per time must partition the circle; cells are their products. Throws SampleError when
/// an expected count is below 5.
FddReport fdd_check(const PathEnsemble& ens, const SpectralDecomposition& dec, const WeightedGalerkin& g,
                    const std::vector<double>& times, const std::vector<std::vector<Arc>>& partitions);

}  // namespace brox
