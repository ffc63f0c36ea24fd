#pragma once

// Fourier coefficients of the invariant weight e^{2W} and exact weighted integrals.

#include <vector>

#include "brox/spectral.hpp"

namespace brox {

/// Highest mode with a nonzero coefficient (0 for constants).
int bandwidth(const FourierField& f) noexcept;

struct WeightSpectrum {
  std::vector<cplx> coeffs;  // ŵ_0..ŵ_band, ŵ_k = (1/2π)∫ e^{2W} e^{-ikx} dx
  double tail = 0.0;         // largest dropped |ŵ_k| relative to ŵ_0
  std::size_t resolved_on = 0;  // points of the grid the coefficients were computed on

  int band() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
  cplx coeff(int k) const noexcept;
  /// ∫_0^{2π} e^{2W} dx.
  double mass() const noexcept;
  /// e^{2W} on a power-of-two grid with at least 2·band + 1 points.
  std::vector<double> values_on(std::size_t points) const;
};

/// Coefficients of e^{2 scale·W}, truncated where they fall below tol·ŵ_0. The quadrature grid
/// is doubled until the dropped tail is below tol; throws WeightTailError past max_points.
WeightSpectrum weight_coefficients(const FourierField& W, double tol = 1e-12, double scale = 1.0,
                                   std::size_t max_points = std::size_t{1} << 22);

/// ∫_0^{2π} f g w dx, exact for the band-limited inputs (trapezoid rule on a grid finer than
/// the total bandwidth).
double weighted_integral(const FourierField& f, const FourierField& g, const WeightSpectrum& w);

/// ∫_a^b e^{ipx} w(x) dx, exact for the retained band.
cplx arc_moment(const WeightSpectrum& w, int p, double a, double b);

/// μ-probabilities of `bins` equal arcs [2πi/bins, 2π(i+1)/bins), μ = w/mass.
std::vector<double> bin_probabilities(const WeightSpectrum& w, std::size_t bins);

}  // namespace brox
