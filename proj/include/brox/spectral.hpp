#pragma once

// Periodic spectral calculus on [0, 2π).
//
// A FourierField stores the coefficients ĉ_0..ĉ_K of a real function
// f(x) = Σ_{|k|≤K} ĉ_k e^{ikx}; negative modes are implied by ĉ_{-k} = conj(ĉ_k).
// Every bilinear product is evaluated on the M-point grid and truncated back to
// |k| ≤ K; with K ≤ M/3 the truncated grid product equals the exact convolution
// truncated to K.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace brox {

using cplx = std::complex<double>;

inline constexpr double inv_sqrt2 = 0.707106781186547524400844362104849039;

class PeriodicGrid {
 public:
  /// Smallest admissible grid (M = 4, K = 1); placeholder for default-constructed fields.
  PeriodicGrid() noexcept : m_(4), k_(1) {}
  /// M must be a power of two and 1 ≤ K ≤ M/3.
  PeriodicGrid(std::size_t points, int max_mode);

  /// Largest dealiased K for M points.
  static PeriodicGrid dealiased(std::size_t points);

  std::size_t points() const noexcept { return m_; }
  int max_mode() const noexcept { return k_; }
  double spacing() const noexcept;
  double point(std::size_t j) const noexcept;
  std::vector<double> nodes() const;

  bool operator==(const PeriodicGrid&) const = default;

 private:
  std::size_t m_;
  int k_;
};

class FourierField {
 public:
  FourierField() : FourierField(PeriodicGrid{}) {}
  explicit FourierField(PeriodicGrid grid);
  /// coeffs holds ĉ_0..ĉ_K; ĉ_0 must be real.
  FourierField(PeriodicGrid grid, std::vector<cplx> coeffs);

  static FourierField constant(PeriodicGrid grid, double value);
  /// Grid values → coefficients truncated to |k| ≤ K.
  static FourierField from_values(PeriodicGrid grid, std::span<const double> values);
  /// Sets ĉ_k (and implicitly ĉ_{-k}); k ≥ 0.
  static FourierField single_mode(PeriodicGrid grid, int k, cplx amplitude);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int max_mode() const noexcept { return grid_.max_mode(); }

  /// ĉ_k for any integer k; zero outside |k| ≤ K.
  cplx coeff(int k) const noexcept;
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  void set_coeff(int k, cplx value);

  std::vector<double> values() const;
  /// Values on a finer (or equal) power-of-two grid, by zero padding.
  std::vector<double> values_on(std::size_t points) const;
  /// Spectral interpolation at an arbitrary real point (periodic extension).
  double evaluate(double x) const noexcept;

  /// Zero every mode with |k| > kmax.
  FourierField low_pass(int kmax) const;
  /// Zero every mode with |k| ≤ kmax.
  FourierField high_pass(int kmax) const;
  /// Same function on another grid; modes beyond the new K are dropped.
  FourierField resampled(const PeriodicGrid& grid) const;

  double mean() const noexcept { return coeffs_[0].real(); }
  bool is_finite() const noexcept;

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double s) noexcept;

  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }
  friend FourierField operator*(FourierField a, double s) { return a *= s; }
  friend FourierField operator-(FourierField a) { return a *= -1.0; }

 private:
  PeriodicGrid grid_;
  std::vector<cplx> coeffs_;
};

void require_same_grid(const FourierField& a, const FourierField& b, const char* op);

// ---------------------------------------------------------------------------
// Fourier multipliers

using Multiplier = std::function<cplx(int)>;

/// Output coefficients m(k)·ĉ_k; throws SymmetryError unless m(-k) = conj(m(k)).
FourierField apply_multiplier(const FourierField& f, const Multiplier& m);

namespace symbol {
inline cplx laplacian(int k) { return -static_cast<double>(k) * k; }
inline cplx gradient(int k) { return {0.0, static_cast<double>(k)}; }
cplx heat(int k, double t);
/// G(k) = -(1 - e^{-k²})/k², G(0) = -1, so that Δ∘G = Id - e^{Δ}.
double parametrix(int k);
}  // namespace symbol

FourierField laplacian(const FourierField& f);
FourierField gradient(const FourierField& f);
FourierField heat_flow(const FourierField& f, double t);
/// Parametrix Δ⁻¹ with Δ∘Δ⁻¹ = Id - e^{Δ} exactly as multipliers.
FourierField parametrix_inverse(const FourierField& f);

/// Dealiased product f·g truncated to |k| ≤ K.
FourierField product(const FourierField& f, const FourierField& g);

// ---------------------------------------------------------------------------
// Littlewood–Paley blocks (sharp cutoffs)
//
// Δ_{-1} keeps |k| ≤ 1, Δ_j keeps 2^j < |k| ≤ 2^{j+1} for j ≥ 0.

int lp_block_index(int k) noexcept;
/// Largest block index needed to cover |k| ≤ K.
int lp_last_block(int max_mode) noexcept;
/// Inclusive mode range [lo, hi] of block j, clipped to K. Empty when lo > hi.
std::pair<int, int> lp_block_range(int j, int max_mode) noexcept;

FourierField lp_block(const FourierField& f, int j);
/// Σ_{ℓ ≤ j} Δ_ℓ f.
FourierField lp_partial_sum(const FourierField& f, int j);

struct BesovSpec {
  double beta = 0.0;
  double p = 2.0;  // use infinity() for p = ∞
  double q = 2.0;

  static BesovSpec sobolev(double beta);
  static BesovSpec holder(double beta);
};

/// (Σ_j 2^{βjq} ‖Δ_j f‖_{L^p}^q)^{1/q}, L^p taken with the normalized measure dx/2π.
double besov_norm(const FourierField& f, const BesovSpec& spec);
double holder_norm(const FourierField& f, double beta);

/// (Σ_k (1+k²)^β |ĉ_k|²)^{1/2}; equals ‖f‖_{L²(dx/2π)} at β = 0.
double sobolev_norm(const FourierField& f, double beta);
double l2_norm(const FourierField& f);
double sup_norm(const FourierField& f);

}  // namespace brox
