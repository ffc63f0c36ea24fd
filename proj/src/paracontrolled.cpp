#include "brox/paracontrolled.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "brox/errors.hpp"
#include "brox/rng.hpp"

namespace brox {

FourierField para_tilde(const FourierField& a, const SourcedField& X) {
  return -2.0 * parametrix_inverse(para(a, X.source));
}

FourierField corrector_Cnabla(const FourierField& a, const SourcedField& X, const FourierField& b) {
  const FourierField first = resonant(gradient(para_tilde(a, X)), b);
  return first - product(a, resonant(gradient(X.value), b));
}

FourierField corrector_S(const FourierField& a, const SourcedField& X, const FourierField& b) {
  return para(b, para_tilde(a, X)) - para(a, para(b, X.value));
}

FourierField corrector_S_grad(const FourierField& a, const SourcedField& X, const FourierField& b) {
  return para(b, gradient(para_tilde(a, X))) - para(a, para(b, gradient(X.value)));
}

ReferenceSplit split_reference(const EnhancedNoise& Xi, int N, LevelPolicy policy) {
  if (policy == LevelPolicy::clamp && N > Xi.n) N = Xi.n;
  if (N < 0 || N > Xi.n)
    throw LevelError("reference level N=" + std::to_string(N) + " outside [0, n=" + std::to_string(Xi.n) + "]");
  ReferenceSplit s;
  s.N = N;
  const FourierField xi_low = Xi.xi.low_pass(N);
  s.S2_low = second_source(xi_low);
  s.X1_low = SourcedField::from_source(xi_low);
  s.X1_tail = SourcedField::from_source(Xi.X1.source - xi_low);
  s.X2_tail = SourcedField::from_source(Xi.X2.source - s.S2_low);
  return s;
}

ParacontrolledMap::ParacontrolledMap(const EnhancedNoise& Xi, int N, LevelPolicy policy)
    : grid_(Xi.grid()),
      n_(Xi.n),
      split_(split_reference(Xi, N, policy)),
      tail_source_(split_.X1_tail.source + split_.X2_tail.source) {}

FourierField ParacontrolledMap::perturbation(const FourierField& u) const {
  require_same_grid(u, split_.X1_tail.value, "perturbation");
  const FourierField p = para(BlockDecomposition(gradient(u)), tail_source_);
  return -2.0 * parametrix_inverse(p);
}

FourierField ParacontrolledMap::phi(const FourierField& u) const { return u - perturbation(u); }

ParacontrolledFunction ParacontrolledMap::gamma(const FourierField& u_sharp, const GammaOptions& opt) const {
  const double scale = std::max(1.0, sobolev_norm(u_sharp, 1.0));
  FourierField u = u_sharp;
  double first_step = -1.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    FourierField next = u_sharp + perturbation(u);
    const double step = sobolev_norm(next - u, 1.0);
    u = std::move(next);
    if (!std::isfinite(step) || (first_step > 0 && step > 1e6 * first_step))
      throw ThresholdError("Γ iteration diverges at N=" + std::to_string(N()) + "; increase the reference level");
    if (first_step < 0) first_step = std::max(step, 1e-300);
    if (step <= opt.tolerance * scale) return {u, u_sharp, N(), n_, it, step};
  }
  throw ThresholdError("Γ iteration did not reach tolerance within " + std::to_string(opt.max_iterations) +
                       " iterations at N=" + std::to_string(N()) + "; increase the reference level");
}

FourierField phi_map(const FourierField& u, const EnhancedNoise& Xi, int N) {
  return ParacontrolledMap(Xi, N).phi(u);
}

ParacontrolledFunction gamma_map(const FourierField& u_sharp, const EnhancedNoise& Xi, int N,
                                 const GammaOptions& opt) {
  return ParacontrolledMap(Xi, N).gamma(u_sharp, opt);
}

std::vector<FourierField> probe_fields(const PeriodicGrid& grid, int count, std::uint64_t seed, double decay) {
  std::vector<FourierField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    rng::SplitMix64 gen(seed, rng::Domain::probe, static_cast<std::uint64_t>(i));
    FourierField f(grid);
    f.set_coeff(0, gen.normal());
    for (int k = 1; k <= grid.max_mode(); ++k) {
      const auto [g1, g2] = gen.normal_pair();
      f.set_coeff(k, cplx(g1, g2) * (inv_sqrt2 * std::pow(static_cast<double>(k), -decay)));
    }
    out.push_back(std::move(f));
  }
  return out;
}

double lipschitz_ratio(const ParacontrolledMap& map, const std::vector<FourierField>& probes) {
  double worst = 0.0;
  for (const auto& u : probes) {
    const double den = sobolev_norm(u, 1.0);
    if (den > 0) worst = std::max(worst, sobolev_norm(map.perturbation(u), 1.0) / den);
  }
  return worst;
}

int estimate_N_Xi(const EnhancedNoise& Xi, std::vector<ThresholdRow>* table, int probe_count,
                  std::uint64_t probe_seed) {
  const auto probes = probe_fields(Xi.grid(), probe_count, probe_seed, 2.0);
  for (int N = 0;; N = (N == 0 ? 1 : 2 * N)) {
    const int level = std::min(N, Xi.n);
    const double r = lipschitz_ratio(ParacontrolledMap(Xi, level), probes);
    if (table) table->push_back({level, r});
    if (r <= 0.5) return level;
    if (level == Xi.n) throw LevelError("N_Xi sweep exhausted the noise level n=" + std::to_string(Xi.n));
  }
}

}  // namespace brox
