#pragma once

// Fourier–Bony paraproduct and resonant product.
//
//   P_f g   = Σ_{ℓ < ℓ'-1} Δ_ℓ f Δ_ℓ' g = Σ_ℓ' S_{ℓ'-2} f · Δ_ℓ' g
//   Π(f, g) = Σ_{|ℓ-ℓ'| ≤ 1} Δ_ℓ f Δ_ℓ' g
//
// so that P_f g + Π(f, g) + P_g f = f·g truncated to K.

#include <span>
#include <vector>

#include "brox/spectral.hpp"

namespace brox {

/// Grid values of every Littlewood–Paley block of a field and of its partial sums.
/// Build once for a field that enters many products (ξ, a source S).
class BlockDecomposition {
 public:
  explicit BlockDecomposition(const FourierField& f);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int last_block() const noexcept { return last_; }

  /// Values of Δ_j f; empty span when j is outside [-1, last_block()].
  std::span<const double> block(int j) const noexcept;
  /// Values of S_j f = Σ_{ℓ ≤ j} Δ_ℓ f; empty when j < -1, the full field when j ≥ last_block().
  std::span<const double> partial(int j) const noexcept;

 private:
  PeriodicGrid grid_;
  int last_;
  std::vector<std::vector<double>> blocks_;
  std::vector<std::vector<double>> partials_;
};

FourierField para(const BlockDecomposition& f, const BlockDecomposition& g);
FourierField resonant(const BlockDecomposition& f, const BlockDecomposition& g);

FourierField para(const FourierField& f, const FourierField& g);
FourierField resonant(const FourierField& f, const FourierField& g);

/// Yₙ = Π(∇X₁, ξₙ).
FourierField resonant_lift(const FourierField& X1, const FourierField& xi_n);

}  // namespace brox
