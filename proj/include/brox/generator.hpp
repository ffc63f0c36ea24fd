#pragma once

// The generator 𝓛 = ½Δ + ξ·∇ in paracontrolled form and its finite-n counterpart 𝓛ₙ.

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "brox/bony.hpp"
#include "brox/paracontrolled.hpp"
#include "brox/weight.hpp"

namespace brox {

/// How the e^Δ defect of F_Ξ is assembled.
///  source_term:       + e^Δ P_{∇u}(S₁ᵗ + S₂ᵗ), what the parametrix algebra produces.
///  displayed_formula: - e^Δ (P_{∇u}X₁ᵗ + P_{∇u}X₂ᵗ), kept for comparison; fails the exactness oracle.
enum class DefectVariant { source_term, displayed_formula };

class GeneratorHandle {
 public:
  /// Throws ThresholdError when Γ^{>N} does not contract (probe Lipschitz ratio > 1/2).
  GeneratorHandle(EnhancedNoise Xi, int N, double c_shift = 1.0, LevelPolicy policy = LevelPolicy::strict);
  static GeneratorHandle at_threshold(EnhancedNoise Xi, double c_shift = 1.0);

  const EnhancedNoise& Xi() const noexcept { return *xi_; }
  const PeriodicGrid& grid() const noexcept { return xi_->grid(); }
  int N() const noexcept { return map_->N(); }
  double c_shift() const noexcept { return c_; }
  const ParacontrolledMap& map() const noexcept { return *map_; }
  /// Coefficients of e^{2Wₙ}, computed on first use.
  const WeightSpectrum& weight() const;

  ParacontrolledFunction gamma(const FourierField& u_sharp, const GammaOptions& opt = {}) const {
    return map_->gamma(u_sharp, opt);
  }

  struct Cache;
  const Cache& cache() const noexcept { return *cache_; }

 private:
  std::shared_ptr<const EnhancedNoise> xi_;
  std::shared_ptr<const ParacontrolledMap> map_;
  std::shared_ptr<const Cache> cache_;
  mutable std::shared_ptr<const WeightSpectrum> weight_;
  double c_;
};

FourierField apply_L_expanded(const ParacontrolledFunction& u, const GeneratorHandle& h,
                              DefectVariant variant = DefectVariant::source_term);

/// ½Δu + ξₙ·∇u with the product truncated to K.
FourierField apply_L_direct(const FourierField& u, const FourierField& xi_n);
/// ½Δu + ξₙ·∇u without truncation, on a padded grid holding every mode of the product.
FourierField apply_L_untruncated(const FourierField& u, const FourierField& xi_n);
/// ½e^{-2Wₙ}∇(e^{2Wₙ}∇u) evaluated literally on a fine grid, truncated to K.
FourierField apply_L_symmetric_form(const FourierField& u, const FourierField& W_n);

/// -∫ (𝓛ₙu) v dμ with μ = e^{2Wₙ}dx / ∫e^{2Wₙ}dx the invariant probability measure.
/// Normalizing by the mass keeps the value O(‖∇u‖²) however large δ(Wₙ) is.
double form_value(const FourierField& u, const FourierField& v, const GeneratorHandle& h);
/// ½∫ ∇u ∇v dμ, the same normalization; equals form_value by integration by parts.
double dirichlet_form(const FourierField& u, const FourierField& v, const WeightSpectrum& w);

struct ResolventOptions {
  double tolerance = 1e-8;  // relative L² residual
  int max_iterations = 400;
  int restart = 60;
  GammaOptions gamma{1e-13, 200};
};

struct ResolventResult {
  ParacontrolledFunction u;
  double residual = 0.0;  // ‖(𝓛-c)u - f‖_{L²}/‖f‖_{L²}
  int iterations = 0;
};

/// Solves (𝓛 - c)u = f for u = Γu♯ by GMRES on the u♯ coefficients, right-preconditioned by (½Δ - c)⁻¹.
/// Throws ConvergenceError on stagnation.
ResolventResult resolvent_solve(const FourierField& f, const GeneratorHandle& h, const ResolventOptions& opt = {});

/// Dense Fourier–Galerkin matrix of 𝓛ₙ on modes -K..K (row/column index k + K).
Eigen::MatrixXcd galerkin_matrix(const FourierField& xi_n);
/// Dense Galerkin solve of (𝓛ₙ - c)u = f; the oracle for resolvent_solve.
FourierField resolvent_dense(const FourierField& f, const FourierField& xi_n, double c);

struct ConvergenceRow {
  int n;
  double error;     // ‖𝓛Γu♯ - 𝓛ₙΓₙu♯‖_{L²}
  double distance;  // ‖Ξ - Ξₙ‖_{𝒳^α}
  double ratio;
  double form_gap;  // |⟨𝓛ₙΓₙu♯, Γₙu♯⟩ - ⟨𝓛Γu♯, Γu♯⟩| (flat L² pairing)
};

/// 𝓛 is represented by the reference level `reference` (the finest available); all levels share
/// the reference threshold N.
std::vector<ConvergenceRow> convergence_LnGamman(const FourierField& u_sharp, const NoiseRealization& noise,
                                                 const PeriodicGrid& grid, double alpha,
                                                 const std::vector<int>& levels, int reference);

struct ResolventConvergenceRow {
  int n;
  double error;  // ‖(𝓛-c)⁻¹f - (𝓛ₙ-c)⁻¹f‖_{H¹}
  double distance;
  double ratio;
};

std::vector<ResolventConvergenceRow> resolvent_convergence(const FourierField& f, const NoiseRealization& noise,
                                                           const PeriodicGrid& grid, double alpha,
                                                           const std::vector<int>& levels, int reference,
                                                           double c_shift = 1.0, const ResolventOptions& opt = {});

struct GraphNormRow {
  double domain_norm;  // (‖u‖² + ‖Φ(u)‖²_{H²})^{1/2}
  double graph_norm;   // (‖u‖² + ‖𝓛u‖²)^{1/2}
  double ratio;
};

std::vector<GraphNormRow> graph_norm_check(const std::vector<FourierField>& u_sharp_probes, const GeneratorHandle& h);

}  // namespace brox
