#pragma once

// Weighted Galerkin eigenproblem of 𝓛ₙ on the torus, heat kernels, Gaussian-bound fits,
// and the invariant measure.
//
// Real basis φ₀ = 1, φ_{2k-1} = √2 cos kx, φ_{2k} = √2 sin kx (k = 1..K_b).
// Mass B_ij = ∫ φ_i φ_j w dx and stiffness A_ij = ½∫ φ_i' φ_j' w dx with w = e^{2Wₙ};
// 𝓛ₙ corresponds to -B⁻¹A, eigenpairs solve A c = -λ B c.
//
// The ground-state basis ψ_i = e^{-Wₙ}φ_i spans a different trial space with B = 2π I and
// A_ij = ½∫(φ_i' - Wₙ'φ_i)(φ_j' - Wₙ'φ_j) dx. Its eigenproblem stays well conditioned when
// e^{2Wₙ} spans many orders of magnitude (cond B ≈ e^{2 osc Wₙ} in the Fourier basis), at the
// price of constants being represented only up to the Fourier tail of e^{Wₙ}.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "brox/spectral.hpp"
#include "brox/weight.hpp"

namespace brox {

struct WeightedGalerkin {
  int basis_modes = 0;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
  WeightSpectrum weight;
  std::optional<FourierField> ground_state;  // Wₙ when the basis is e^{-Wₙ}φ_i

  /// max |M - Mᵀ| relative to max |M| over both matrices.
  double symmetry_defect() const;
};

WeightedGalerkin assemble_weighted(const WeightSpectrum& w, int basis_modes);
WeightedGalerkin assemble_weighted(const FourierField& W_n, int basis_modes);
WeightedGalerkin assemble_ground_state(const FourierField& W_n, int basis_modes);
/// ∫_a^b φ_i φ_j w dx.
Eigen::MatrixXd arc_mass(const WeightSpectrum& w, int basis_modes, double a, double b);

/// φ_i(x_j) on an equispaced grid of `points` nodes (rows = nodes).
Eigen::MatrixXd basis_values(int basis_modes, std::size_t points);
/// φ_i at arbitrary points.
Eigen::MatrixXd basis_values_at(int basis_modes, const std::vector<double>& x);

struct SpectralDecomposition {
  int n = 0;
  Eigen::VectorXd eigenvalues;  // λ₁ ≥ λ₂ ≥ …
  Eigen::MatrixXd coeffs;       // column m: basis coefficients of e_m, Bᵀ-orthonormal
  WeightSpectrum weight;
  std::optional<FourierField> ground_state;
  double gap = 0.0;             // λ₁ - λ₂

  int basis_modes() const noexcept { return static_cast<int>((coeffs.rows() - 1) / 2); }
  /// e_m on the equispaced grid (rows = nodes, columns = m < count).
  Eigen::MatrixXd eigenfunctions(std::size_t points, int count = -1) const;
  /// max relative deviation of e₁ from its mean on the grid.
  double e1_constancy(std::size_t points) const;
  /// max |cᵀ B c - I| over the leading `count` eigenfunctions.
  double orthonormality_defect(const WeightedGalerkin& g, int count = -1) const;
};

/// e^{λ_m t}, with factors below 1e-150 set to 0 (subnormals stall dense products).
Eigen::VectorXd semigroup_decay(const SpectralDecomposition& dec, double t);

SpectralDecomposition eigendecompose(const WeightedGalerkin& g, int n = 0);

/// Eigenvalues of the dense Fourier–Galerkin 𝓛ₙ matrix sorted by decreasing real part.
Eigen::VectorXcd galerkin_eigenvalues(const FourierField& xi_n);

enum class KernelMode { eigen_expansion, resolvent_power };

struct HeatKernel {
  double t = 0.0;
  KernelMode mode = KernelMode::eigen_expansion;
  std::vector<std::size_t> rows;  // grid indices of the x points
  std::size_t points = 0;         // y grid size
  Eigen::MatrixXd values;         // p_t(x_rows[i], y_j)
  // Rounding bound of the eigen expansion per entry: n u · f(x)h(y) r(x)r(y), r² = Σ e^{λt}φ_m²
  // (Cauchy–Schwarz on the sum). Empty for kernels built from a coefficient matrix.
  Eigen::MatrixXd noise;

  double x(std::size_t i) const;
  double y(std::size_t j) const;
  /// max_i |∫ p_t(x_i, y) dy - 1|.
  double row_sum_defect() const;
  double min_value() const { return values.minCoeff(); }
};

/// All rows when `rows` is empty. Needs points > 2·K_b + band(w) for exact row integrals.
HeatKernel heat_kernel_eigen(const SpectralDecomposition& dec, double t, std::size_t points,
                             std::vector<std::size_t> rows = {});

/// Coefficient-space semigroup V e^{tΛ} Vᵀ B.
Eigen::MatrixXd semigroup_matrix(const SpectralDecomposition& dec, const WeightedGalerkin& g, double t);
/// e^{tc} (B + (t/N)(cB + A))⁻¹B raised to the N-th power: backward-Euler resolvent product.
Eigen::MatrixXd resolvent_power_matrix(const WeightedGalerkin& g, double t, int steps, double c_shift = 1.0);
HeatKernel kernel_from_matrix(const Eigen::MatrixXd& T, const WeightedGalerkin& g, double t, std::size_t points,
                              std::vector<std::size_t> rows, KernelMode mode);
HeatKernel semigroup_resolvent_power(const WeightedGalerkin& g, double t, int steps, std::size_t points,
                                     std::vector<std::size_t> rows = {}, double c_shift = 1.0);

/// max |∫p_s(x,z)p_t(z,y)dz - p_{s+t}(x,y)| relative to max p_{s+t}; all three kernels on the full grid.
double chapman_kolmogorov_defect(const HeatKernel& ps, const HeatKernel& pt, const HeatKernel& pst);
/// max |p(x,y)w(x) - p(y,x)w(y)| relative to max |p(x,y)w(x)|; needs a full-grid kernel.
double detailed_balance_defect(const HeatKernel& p, const WeightSpectrum& w);

/// Periodized Gaussian kernel of ½Δ on the torus at displacement d.
double theta_kernel(double t, double d);
double torus_distance(double x, double y);

struct GaussianFit {
  double c_lower = 0.0;  // smallest c with p ≥ e^{-c d²/t}/(c√t)
  double c_upper = 0.0;  // smallest c with p ≤ c e^{-d²/(ct)}/√t
  bool finite() const;
};

/// Fits both constants over every (t, x, y) of the kernels, skipping values below
/// `floor`·max p, below 10x the largest negative value of that kernel, and below 10x the
/// kernel's rounding bound at that entry.
GaussianFit gaussian_bound_fit(const std::vector<HeatKernel>& kernels, double floor = 1e-10);
/// Same fit applied to the flat theta kernel sampled at the kernels' (t, x, y).
GaussianFit gaussian_bound_fit_flat(const std::vector<HeatKernel>& kernels, double floor = 1e-10);

/// Default small-time window: `count` log-spaced points in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

/// max_x |∂ₓ(e^{t𝓛}f)| + max_x |e^{t𝓛}f| on the grid, f given by values on a fine grid.
double strong_feller_norm(const SpectralDecomposition& dec, const WeightedGalerkin& g, double t,
                          const std::vector<double>& f_values, std::size_t eval_points);

struct InvariantMeasure {
  std::vector<double> density;  // e^{2Wₙ}/Z on the grid
  double adjoint_residual = 0.0;  // ‖∇f - 2ξₙ f‖_{L²}/‖f‖_{L²}, f = e^{2Wₙ}
  double stationarity = 0.0;      // relative cancellation in ∫(𝓛ₙφ) e^{2Wₙ}dx over Fourier modes
};

InvariantMeasure invariant_measure(const FourierField& xi_n, std::size_t points);

struct MixingFit {
  double log_C = 0.0;
  double rate = 0.0;  // fitted slope of log TV in t (negative)
  double rate_se = 0.0;
  std::vector<double> times;
  std::vector<double> tv;
};

/// max over x rows of ½∫|p_t(x,y) - μ(y)|dy.
double tv_to_invariant(const HeatKernel& p, const WeightSpectrum& w);
/// Least-squares fit of log TV over the given times (kernel route).
/// Eight log-spaced times over [t₀, t₀ + 3/gap] (three e-foldings of the gap), with
/// t₀ = max(1/gap, 2/(λ₂ - λ₃)) so the third mode is damped by e^{-2} relative to the second.
std::vector<double> mixing_window(const SpectralDecomposition& dec);
MixingFit mixing_rate_kernel(const SpectralDecomposition& dec, const std::vector<double>& times, std::size_t points,
                             std::vector<std::size_t> rows = {});
/// Least-squares fit of log y on t.
MixingFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y);

/// Arc [start, start + length) of the circle; length ≥ 2π is the full circle.
struct Arc {
  double start = 0.0;
  double length = 0.0;

  bool contains(double x) const;
  Eigen::MatrixXd mass(const WeightSpectrum& w, int basis_modes) const;
};

/// P_{x0}(X_{t_1} ∈ A_1, …, X_{t_m} ∈ A_m) from the eigen-expansion of the kernels.
double fdd_probability(const SpectralDecomposition& dec, const WeightedGalerkin& g, double x0,
                       const std::vector<double>& times, const std::vector<Arc>& sets);

}  // namespace brox
