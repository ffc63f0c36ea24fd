#include "brox/weight.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "brox/errors.hpp"
#include "brox/fft.hpp"

namespace brox {

int bandwidth(const FourierField& f) noexcept {
  const auto c = f.coeffs();
  for (int k = static_cast<int>(c.size()) - 1; k > 0; --k)
    if (c[static_cast<std::size_t>(k)] != cplx{}) return k;
  return 0;
}

cplx WeightSpectrum::coeff(int k) const noexcept {
  const int a = std::abs(k);
  if (a > band()) return {};
  return k >= 0 ? coeffs[static_cast<std::size_t>(a)] : std::conj(coeffs[static_cast<std::size_t>(a)]);
}

double WeightSpectrum::mass() const noexcept { return 2.0 * std::numbers::pi * coeffs[0].real(); }

std::vector<double> WeightSpectrum::values_on(std::size_t points) const {
  if (!std::has_single_bit(points) || points < 2 * static_cast<std::size_t>(band()) + 1)
    throw GridError("weight values: grid too small for the weight band");
  std::vector<cplx> half(points / 2 + 1, cplx{});
  std::copy(coeffs.begin(), coeffs.end(), half.begin());
  std::vector<double> out(points);
  fft::backward(half, out);
  return out;
}

WeightSpectrum weight_coefficients(const FourierField& W, double tol, double scale, std::size_t max_points) {
  const int bw = std::max(bandwidth(W), 1);
  std::size_t points = std::bit_ceil(static_cast<std::size_t>(16 * bw));
  points = std::max(points, std::bit_ceil(2 * static_cast<std::size_t>(W.max_mode()) + 1));
  for (; points <= max_points; points *= 2) {
    std::vector<double> v = W.values_on(points);
    for (double& x : v) x = std::exp(2.0 * scale * x);
    std::vector<cplx> half(points / 2 + 1);
    fft::forward(v, half);
    const double ref = half[0].real();
    int band = 0;
    for (std::size_t k = 1; k < half.size(); ++k)
      if (std::abs(half[k]) > tol * ref) band = static_cast<int>(k);
    // Resolved once the retained band sits well inside the grid: aliasing of the dropped tail is then negligible.
    if (static_cast<std::size_t>(band) <= points / 4) {
      WeightSpectrum w;
      w.coeffs.assign(half.begin(), half.begin() + band + 1);
      w.coeffs[0] = cplx(w.coeffs[0].real(), 0.0);
      double tail = 0.0;
      for (std::size_t k = static_cast<std::size_t>(band) + 1; k < half.size(); ++k) tail = std::max(tail, std::abs(half[k]));
      w.tail = tail / ref;
      w.resolved_on = points;
      return w;
    }
  }
  throw WeightTailError("e^{2W} is not resolved on grids up to " + std::to_string(max_points) + " points");
}

double weighted_integral(const FourierField& f, const FourierField& g, const WeightSpectrum& w) {
  const std::size_t need = static_cast<std::size_t>(bandwidth(f) + bandwidth(g) + w.band()) + 1;
  std::size_t points = std::bit_ceil(need);
  points = std::max({points, std::bit_ceil(2 * static_cast<std::size_t>(std::max(f.max_mode(), g.max_mode())) + 1),
                     std::bit_ceil(2 * static_cast<std::size_t>(w.band()) + 1)});
  const auto fv = f.values_on(points);
  const auto gv = g.values_on(points);
  const auto wv = w.values_on(points);
  double s = 0.0;
  for (std::size_t i = 0; i < points; ++i) s += fv[i] * gv[i] * wv[i];
  return 2.0 * std::numbers::pi * s / static_cast<double>(points);
}

cplx arc_moment(const WeightSpectrum& w, int p, double a, double b) {
  cplx s{};
  for (int q = -w.band(); q <= w.band(); ++q) {
    const int m = p + q;
    if (m == 0) {
      s += w.coeff(q) * (b - a);
    } else {
      const double md = static_cast<double>(m);
      s += w.coeff(q) * (std::polar(1.0, md * b) - std::polar(1.0, md * a)) / cplx(0.0, md);
    }
  }
  return s;
}

std::vector<double> bin_probabilities(const WeightSpectrum& w, std::size_t bins) {
  if (bins == 0) throw ParameterError("bin count must be positive");
  const double Z = w.mass();
  const double h = 2.0 * std::numbers::pi / static_cast<double>(bins);
  std::vector<double> mu(bins);
  for (std::size_t i = 0; i < bins; ++i)
    mu[i] = arc_moment(w, 0, h * static_cast<double>(i), h * static_cast<double>(i + 1)).real() / Z;
  return mu;
}

}  // namespace brox
