#pragma once

// Independent brute-force references used by the unit tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include "brox/rng.hpp"
#include "brox/spectral.hpp"

namespace oracle {

using brox::cplx;
using brox::FourierField;
using brox::PeriodicGrid;

// Full two-sided coefficient map k -> ĉ_k.
using Spectrum = std::map<int, cplx>;

inline Spectrum spectrum(const FourierField& f) {
  Spectrum s;
  for (int k = -f.max_mode(); k <= f.max_mode(); ++k) s[k] = f.coeff(k);
  return s;
}

inline Spectrum convolve(const Spectrum& a, const Spectrum& b) {
  Spectrum out;
  for (auto [k, ak] : a)
    for (auto [l, bl] : b) out[k + l] += ak * bl;
  return out;
}

inline FourierField to_field(const PeriodicGrid& g, const Spectrum& s) {
  FourierField f(g);
  for (auto [k, c] : s)
    if (k >= 0 && k <= g.max_mode()) f.set_coeff(k, k == 0 ? cplx(c.real(), 0.0) : c);
  return f;
}

inline int block_of(int k) {
  k = std::abs(k);
  if (k <= 1) return -1;
  int j = 0;
  while ((1 << (j + 1)) < k) ++j;
  return j;
}

inline Spectrum block(const Spectrum& s, int j) {
  Spectrum out;
  for (auto [k, c] : s)
    if (block_of(k) == j) out[k] = c;
  return out;
}

// Σ over block pairs selected by `keep(ℓ, ℓ')` of Δ_ℓ a · Δ_ℓ' b, by convolution.
template <class Keep>
FourierField block_pairs(const FourierField& a, const FourierField& b, Keep keep) {
  const Spectrum sa = spectrum(a), sb = spectrum(b);
  Spectrum acc;
  for (int l = -1; l < 12; ++l)
    for (int lp = -1; lp < 12; ++lp)
      if (keep(l, lp))
        for (auto [k, c] : convolve(block(sa, l), block(sb, lp))) acc[k] += c;
  return to_field(a.grid(), acc);
}

inline FourierField para(const FourierField& a, const FourierField& b) {
  return block_pairs(a, b, [](int l, int lp) { return l < lp - 1; });
}

inline FourierField resonant(const FourierField& a, const FourierField& b) {
  return block_pairs(a, b, [](int l, int lp) { return std::abs(l - lp) <= 1; });
}

inline FourierField product(const FourierField& a, const FourierField& b) {
  return to_field(a.grid(), convolve(spectrum(a), spectrum(b)));
}

inline FourierField random_field(const PeriodicGrid& g, std::uint64_t seed, int kmax, double decay = 0.0) {
  brox::rng::SplitMix64 gen(seed);
  FourierField f(g);
  f.set_coeff(0, gen.normal());
  for (int k = 1; k <= kmax; ++k)
    f.set_coeff(k, cplx(gen.normal(), gen.normal()) * std::pow(static_cast<double>(k), -decay));
  return f;
}

inline double max_coeff_diff(const FourierField& a, const FourierField& b) {
  double m = 0.0;
  for (int k = 0; k <= std::max(a.max_mode(), b.max_mode()); ++k) m = std::max(m, std::abs(a.coeff(k) - b.coeff(k)));
  return m;
}

inline double max_coeff(const FourierField& a) {
  double m = 0.0;
  for (cplx c : a.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace oracle
