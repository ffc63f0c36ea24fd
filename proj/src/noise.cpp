#include "brox/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "brox/bony.hpp"
#include "brox/errors.hpp"
#include "brox/rng.hpp"

namespace brox {

cplx NoiseRealization::xi(int k) const noexcept {
  const int a = std::abs(k);
  if (a == 0 || a > k_max()) return {};
  const cplx c = coeffs[static_cast<std::size_t>(a - 1)];
  return k > 0 ? c : std::conj(c);
}

NoiseRealization sample_noise(std::uint64_t seed, int k_max) {
  if (k_max < 1) throw ParameterError("sample_noise: K_max must be >= 1");
  NoiseRealization out;
  out.seed = seed;
  out.coeffs.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    rng::SplitMix64 gen(seed, rng::Domain::noise, static_cast<std::uint64_t>(k));
    const auto [g1, g2] = gen.normal_pair();
    out.coeffs.emplace_back(g1 * inv_sqrt2, g2 * inv_sqrt2);
  }
  return out;
}

namespace {

void check_level(const NoiseRealization& noise, int n, const PeriodicGrid& grid) {
  if (n < 1 || n > noise.k_max())
    throw LevelError("level n=" + std::to_string(n) + " outside [1, K_max=" + std::to_string(noise.k_max()) + "]");
  if (n > grid.max_mode())
    throw LevelError("level n=" + std::to_string(n) + " exceeds grid K=" + std::to_string(grid.max_mode()));
}

}  // namespace

FourierField truncate(const NoiseRealization& noise, int n, const PeriodicGrid& grid) {
  check_level(noise, n, grid);
  FourierField f(grid);
  for (int k = 1; k <= n; ++k) f.set_coeff(k, noise.xi(k));
  return f;
}

FourierField potential_of(const FourierField& xi) {
  if (std::abs(xi.mean()) > 1e-14 * std::max(1.0, sup_norm(xi)))
    throw ParameterError("potential: ξ must be mean-free");
  FourierField W(xi.grid());
  double constant = 0.0;
  for (int k = 1; k <= xi.max_mode(); ++k) {
    const cplx c = xi.coeff(k) / cplx(0.0, k);
    W.set_coeff(k, c);
    constant -= 2.0 * c.real();
  }
  W.set_coeff(0, constant);
  return W;
}

FourierField potential(const NoiseRealization& noise, int n, const PeriodicGrid& grid) {
  return potential_of(truncate(noise, n, grid));
}

SourcedField SourcedField::from_source(FourierField source) {
  FourierField value = -2.0 * parametrix_inverse(source);
  return {std::move(value), std::move(source)};
}

double SourcedField::defect() const {
  const FourierField d = value + 2.0 * parametrix_inverse(source);
  double m = 0.0;
  for (cplx c : d.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

FourierField solve_X1(const FourierField& xi_n) { return -2.0 * parametrix_inverse(xi_n); }

FourierField second_source(const FourierField& xi) {
  const FourierField dX1 = gradient(solve_X1(xi));
  const BlockDecomposition bx(xi);
  const BlockDecomposition bd(dX1);
  return para(bx, bd) + resonant(bd, bx);
}

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 1.5))
    throw ParameterError("alpha must lie in (1, 3/2), got " + std::to_string(alpha));
}

EnhancedNoise enhance_field(const FourierField& xi_n, int n, double alpha) {
  check_alpha(alpha);
  EnhancedNoise e;
  e.n = n;
  e.alpha = alpha;
  e.xi = xi_n;
  e.W = potential_of(xi_n);
  e.X1 = SourcedField::from_source(xi_n);
  const FourierField dX1 = gradient(e.X1.value);
  const BlockDecomposition bx(xi_n);
  const BlockDecomposition bd(dX1);
  e.resonant = resonant(bd, bx);
  e.X2 = SourcedField::from_source(para(bx, bd) + e.resonant);
  e.norms.xi = holder_norm(xi_n, alpha - 2.0);
  e.norms.resonant = holder_norm(e.resonant, 2.0 * alpha - 3.0);
  return e;
}

EnhancedNoise enhance(const NoiseRealization& noise, int n, double alpha, const PeriodicGrid& grid) {
  return enhance_field(truncate(noise, n, grid), n, alpha);
}

XiNorms enhanced_distance(const EnhancedNoise& a, const EnhancedNoise& b) {
  require_same_grid(a.xi, b.xi, "enhanced_distance");
  return {holder_norm(a.xi - b.xi, a.alpha - 2.0), holder_norm(a.resonant - b.resonant, 2.0 * a.alpha - 3.0)};
}

double delta_W(const FourierField& W_n) {
  const auto v = W_n.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

FourierField renormalized_resonant(const FourierField& X1, const FourierField& xi, double c_eps) {
  return resonant_lift(X1, xi) - FourierField::constant(xi.grid(), c_eps);
}

double RenormalizationEstimate::max_abs_z() const {
  double m = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i)
    if (std_error[i] > 0) m = std::max(m, std::abs(mean[i]) / std_error[i]);
  return m;
}

double RenormalizationEstimate::constant() const {
  double s = 0.0;
  for (double v : mean) s += v;
  return mean.empty() ? 0.0 : s / static_cast<double>(mean.size());
}

RenormalizationEstimate estimate_renormalization(std::uint64_t first_seed, int n_seeds, int n,
                                                 const PeriodicGrid& grid) {
  if (n_seeds < 2) throw SampleError("estimate_renormalization: need at least two seeds");
  const std::size_t m = grid.points();
  // Welford accumulation per grid point.
  std::vector<double> mean(m, 0.0), m2(m, 0.0);
  for (int s = 0; s < n_seeds; ++s) {
    const NoiseRealization noise = sample_noise(first_seed + static_cast<std::uint64_t>(s), n);
    const FourierField xi = truncate(noise, n, grid);
    const auto a = gradient(solve_X1(xi)).values();
    const auto b = xi.values();
    const double cnt = s + 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = a[i] * b[i];
      const double d = v - mean[i];
      mean[i] += d / cnt;
      m2[i] += d * (v - mean[i]);
    }
  }
  RenormalizationEstimate est;
  est.samples = n_seeds;
  est.mean = mean;
  est.std_error.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    est.std_error[i] = std::sqrt(m2[i] / (n_seeds - 1.0) / n_seeds);
  return est;
}

}  // namespace brox
