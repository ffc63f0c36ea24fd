#pragma once

// Periodic Brownian environment and its enhancement.
//
// ξ(x) = Σ_{k≠0} ξ_k e^{ikx} with ξ_k i.i.d. standard complex Gaussians for k ≥ 1,
// ξ_{-k} = conj(ξ_k). Coefficient k is drawn from its own counter stream, so a
// realization sampled with a larger K_max extends a smaller one.

#include <cstdint>
#include <vector>

#include "brox/spectral.hpp"

namespace brox {

struct NoiseRealization {
  std::uint64_t seed = 0;
  std::vector<cplx> coeffs;  // ξ_1..ξ_{K_max}

  int k_max() const noexcept { return static_cast<int>(coeffs.size()); }
  /// ξ_k for any k; ξ_0 = 0.
  cplx xi(int k) const noexcept;
};

NoiseRealization sample_noise(std::uint64_t seed, int k_max);

/// ξₙ on the given grid (n ≤ min(K_max, K)).
FourierField truncate(const NoiseRealization& noise, int n, const PeriodicGrid& grid);
/// Wₙ(x) = Σ_{0<|k|≤n} ξ_k (e^{ikx} - 1)/(ik), so ∇Wₙ = ξₙ and Wₙ(0) = 0.
FourierField potential(const NoiseRealization& noise, int n, const PeriodicGrid& grid);
/// Same construction from an arbitrary mean-free field.
FourierField potential_of(const FourierField& xi);

/// A field together with the parametrix source it was built from: value = -2Δ⁻¹ source.
struct SourcedField {
  FourierField value;
  FourierField source;

  static SourcedField from_source(FourierField source);
  /// max |value + 2Δ⁻¹ source| over coefficients.
  double defect() const;
};

/// X₁ = -2Δ⁻¹ξₙ.
FourierField solve_X1(const FourierField& xi_n);

/// S₂ = P_ξ∇X₁ + Π(∇X₁, ξ) for the enhanced noise built from xi.
FourierField second_source(const FourierField& xi);

struct XiNorms {
  double xi = 0.0;        // ‖ξₙ‖_{C^{α-2}}
  double resonant = 0.0;  // ‖Yₙ‖_{C^{2α-3}}
  double total() const noexcept { return xi + resonant; }
};

struct EnhancedNoise {
  int n = 0;
  double alpha = 1.45;
  FourierField xi;
  FourierField W;
  SourcedField X1;  // source ξₙ
  SourcedField X2;  // source P_ξ∇X₁ + Π(∇X₁, ξ)
  FourierField resonant;  // Yₙ = Π(∇X₁, ξₙ)
  XiNorms norms;

  const PeriodicGrid& grid() const noexcept { return xi.grid(); }
};

void check_alpha(double alpha);

EnhancedNoise enhance(const NoiseRealization& noise, int n, double alpha, const PeriodicGrid& grid);
/// Enhancement of an arbitrary mean-free ξₙ (scaled or synthetic environments); n labels the level.
EnhancedNoise enhance_field(const FourierField& xi_n, int n, double alpha);

/// Component-wise 𝒳^α distance (ξ in C^{α-2}, Y in C^{2α-3}).
XiNorms enhanced_distance(const EnhancedNoise& a, const EnhancedNoise& b);

/// sup Wₙ - inf Wₙ on the grid.
double delta_W(const FourierField& W_n);

/// Regularization hook for mollifier-type truncations: Π(∇X, ξ) - c_ε.
/// Symmetric Fourier truncation needs c_ε = 0.
FourierField renormalized_resonant(const FourierField& X1, const FourierField& xi, double c_eps);

/// Pointwise mean and standard error of ∇X₁·ξₙ over a seed range.
struct RenormalizationEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
  int samples = 0;

  /// max_x |mean(x)| / se(x).
  double max_abs_z() const;
  /// Spatial average, the constant c_ε a mollified scheme would subtract.
  double constant() const;
};

RenormalizationEstimate estimate_renormalization(std::uint64_t first_seed, int n_seeds, int n,
                                                 const PeriodicGrid& grid);

}  // namespace brox
