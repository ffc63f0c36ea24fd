#pragma once

// Intertwined paraproduct, correctors, and the Φ/Γ parametrization of the domain.
//
// P̃_a X := -2Δ⁻¹(P_a S) for X = -2Δ⁻¹S, so ½ΔP̃_a X = -(P_a S - e^Δ P_a S)
// holds exactly in coefficients.

#include <cstdint>
#include <vector>

#include "brox/bony.hpp"
#include "brox/noise.hpp"

namespace brox {

FourierField para_tilde(const FourierField& a, const SourcedField& X);

/// C∇(a, X, b) = Π(∇P̃_a X, b) - a·Π(∇X, b).
FourierField corrector_Cnabla(const FourierField& a, const SourcedField& X, const FourierField& b);
/// S(a, X, b) = P_b P̃_a X - P_a P_b X.
FourierField corrector_S(const FourierField& a, const SourcedField& X, const FourierField& b);
/// Gradient form entering the generator: P_b ∇P̃_a X - P_a P_b ∇X.
FourierField corrector_S_grad(const FourierField& a, const SourcedField& X, const FourierField& b);

/// Split of the enhanced noise at reference level N.
/// The low parts are the level-N enhancement (ξ_N, X₁^{(N)}, X₂^{(N)}); tails are the remainders.
struct ReferenceSplit {
  int N = 0;
  SourcedField X1_tail;
  SourcedField X2_tail;
  SourcedField X1_low;
  FourierField S2_low;
};

/// strict: N > n is a LevelError. clamp: N ≥ n means X^{(N)} = X^{(n)}, i.e. empty tails;
/// used when a fixed reference level is shared across an n-sweep.
enum class LevelPolicy { strict, clamp };

ReferenceSplit split_reference(const EnhancedNoise& Xi, int N, LevelPolicy policy = LevelPolicy::strict);

struct ParacontrolledFunction {
  FourierField u;
  FourierField u_sharp;
  int N = 0;
  int n = 0;  // level of the reference enhanced noise
  int iterations = 0;
  double residual = 0.0;  // last H¹ increment of the fixed point
};

struct GammaOptions {
  double tolerance = 1e-11;  // on the H¹ increment, relative to max(1, ‖u♯‖_{H¹})
  int max_iterations = 200;
};

/// Φ^{>N} and Γ^{>N} for one (Ξ, N). Block values of the tail source are computed once.
class ParacontrolledMap {
 public:
  ParacontrolledMap(const EnhancedNoise& Xi, int N, LevelPolicy policy = LevelPolicy::strict);

  int N() const noexcept { return split_.N; }
  int n() const noexcept { return n_; }
  const ReferenceSplit& split() const noexcept { return split_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }

  /// T(u) = P̃_{∇u}X₁ᵗ + P̃_{∇u}X₂ᵗ, so Φ(u) = u - T(u).
  FourierField perturbation(const FourierField& u) const;
  FourierField phi(const FourierField& u) const;
  /// Fixed point u = u♯ + T(u) started at u♯; throws ThresholdError if it does not contract.
  ParacontrolledFunction gamma(const FourierField& u_sharp, const GammaOptions& opt = {}) const;

 private:
  PeriodicGrid grid_;
  int n_;
  ReferenceSplit split_;
  BlockDecomposition tail_source_;
};

FourierField phi_map(const FourierField& u, const EnhancedNoise& Xi, int N);
ParacontrolledFunction gamma_map(const FourierField& u_sharp, const EnhancedNoise& Xi, int N,
                                 const GammaOptions& opt = {});

/// Seeded probe fields with coefficients k^{-decay}·(standard complex Gaussian), k ≥ 1,
/// and a standard normal mean. Probe i uses stream (seed, probe, i), drawn k = 0, 1, ….
std::vector<FourierField> probe_fields(const PeriodicGrid& grid, int count, std::uint64_t seed,
                                       double decay);

/// max over probes of ‖T(u)‖_{H¹}/‖u‖_{H¹}.
double lipschitz_ratio(const ParacontrolledMap& map, const std::vector<FourierField>& probes);

struct ThresholdRow {
  int N;
  double ratio;
};

/// Smallest N in {0, 1, 2, 4, …, n} whose Lipschitz ratio is ≤ 1/2; rows of the sweep in `table`.
int estimate_N_Xi(const EnhancedNoise& Xi, std::vector<ThresholdRow>* table = nullptr,
                  int probe_count = 20, std::uint64_t probe_seed = 20240601);

}  // namespace brox
