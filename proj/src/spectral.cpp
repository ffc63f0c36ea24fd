#include "brox/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "brox/errors.hpp"
#include "brox/fft.hpp"

namespace brox {

// ---------------------------------------------------------------------------
// PeriodicGrid

PeriodicGrid::PeriodicGrid(std::size_t points, int max_mode) : m_(points), k_(max_mode) {
  if (points < 4 || !std::has_single_bit(points))
    throw GridError("grid size must be a power of two >= 4, got " + std::to_string(points));
  if (max_mode < 1 || 3 * static_cast<std::size_t>(max_mode) > points)
    throw GridError("max mode K=" + std::to_string(max_mode) + " violates 1 <= K <= M/3 for M=" +
                    std::to_string(points));
}

PeriodicGrid PeriodicGrid::dealiased(std::size_t points) {
  return PeriodicGrid(points, static_cast<int>(points / 3));
}

double PeriodicGrid::spacing() const noexcept {
  return 2.0 * std::numbers::pi / static_cast<double>(m_);
}

double PeriodicGrid::point(std::size_t j) const noexcept {
  return spacing() * static_cast<double>(j);
}

std::vector<double> PeriodicGrid::nodes() const {
  std::vector<double> x(m_);
  for (std::size_t j = 0; j < m_; ++j) x[j] = point(j);
  return x;
}

// ---------------------------------------------------------------------------
// FourierField

FourierField::FourierField(PeriodicGrid grid)
    : grid_(grid), coeffs_(static_cast<std::size_t>(grid.max_mode()) + 1, cplx{}) {}

FourierField::FourierField(PeriodicGrid grid, std::vector<cplx> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != static_cast<std::size_t>(grid_.max_mode()) + 1)
    throw GridError("coefficient vector must hold K+1 entries");
  if (std::abs(coeffs_[0].imag()) > 1e-12 * std::max(1.0, std::abs(coeffs_[0])))
    throw SymmetryError("mean coefficient of a real field must be real");
  coeffs_[0] = cplx(coeffs_[0].real(), 0.0);
}

FourierField FourierField::constant(PeriodicGrid grid, double value) {
  FourierField f(grid);
  f.coeffs_[0] = value;
  return f;
}

FourierField FourierField::from_values(PeriodicGrid grid, std::span<const double> values) {
  if (values.size() != grid.points()) throw GridError("from_values: value count != grid size");
  std::vector<cplx> half(grid.points() / 2 + 1);
  fft::forward(values, half);
  half.resize(static_cast<std::size_t>(grid.max_mode()) + 1);
  half[0] = cplx(half[0].real(), 0.0);
  return FourierField(grid, std::move(half));
}

FourierField FourierField::single_mode(PeriodicGrid grid, int k, cplx amplitude) {
  FourierField f(grid);
  f.set_coeff(k, amplitude);
  return f;
}

cplx FourierField::coeff(int k) const noexcept {
  const int a = std::abs(k);
  if (a > grid_.max_mode()) return {};
  return k >= 0 ? coeffs_[static_cast<std::size_t>(a)] : std::conj(coeffs_[static_cast<std::size_t>(a)]);
}

void FourierField::set_coeff(int k, cplx value) {
  if (k < 0 || k > grid_.max_mode()) throw GridError("set_coeff: mode out of range");
  if (k == 0 && value.imag() != 0.0) throw SymmetryError("mean coefficient must be real");
  coeffs_[static_cast<std::size_t>(k)] = value;
}

std::vector<double> FourierField::values() const { return values_on(grid_.points()); }

std::vector<double> FourierField::values_on(std::size_t points) const {
  if (!std::has_single_bit(points) || points < 2 * static_cast<std::size_t>(grid_.max_mode()) + 1)
    throw GridError("values_on: target grid too small");
  std::vector<cplx> half(points / 2 + 1, cplx{});
  std::copy(coeffs_.begin(), coeffs_.end(), half.begin());
  std::vector<double> out(points);
  fft::backward(half, out);
  return out;
}

double FourierField::evaluate(double x) const noexcept {
  const cplx step(std::cos(x), std::sin(x));
  cplx z = step;
  double acc = coeffs_[0].real();
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    acc += 2.0 * (coeffs_[k] * z).real();
    z *= step;
  }
  return acc;
}

FourierField FourierField::low_pass(int kmax) const {
  FourierField out = *this;
  for (int k = std::max(kmax + 1, 0); k <= grid_.max_mode(); ++k) out.coeffs_[static_cast<std::size_t>(k)] = {};
  return out;
}

FourierField FourierField::high_pass(int kmax) const {
  FourierField out = *this;
  for (int k = 0; k <= std::min(kmax, grid_.max_mode()); ++k) out.coeffs_[static_cast<std::size_t>(k)] = {};
  return out;
}

FourierField FourierField::resampled(const PeriodicGrid& grid) const {
  FourierField out(grid);
  const int kk = std::min(grid.max_mode(), grid_.max_mode());
  for (int k = 0; k <= kk; ++k) out.coeffs_[static_cast<std::size_t>(k)] = coeffs_[static_cast<std::size_t>(k)];
  return out;
}

bool FourierField::is_finite() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

FourierField& FourierField::operator+=(const FourierField& o) {
  require_same_grid(*this, o, "operator+");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  require_same_grid(*this, o, "operator-");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

FourierField& FourierField::operator*=(double s) noexcept {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

void require_same_grid(const FourierField& a, const FourierField& b, const char* op) {
  if (!(a.grid() == b.grid()))
    throw GridError(std::string(op) + ": fields live on different grids");
}

// ---------------------------------------------------------------------------
// Multipliers

FourierField apply_multiplier(const FourierField& f, const Multiplier& m) {
  const int kmax = f.max_mode();
  std::vector<cplx> out(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) {
    const cplx mk = m(k);
    const cplx mneg = m(-k);
    const double scale = std::max(1.0, std::abs(mk));
    if (std::abs(mneg - std::conj(mk)) > 1e-12 * scale)
      throw SymmetryError("multiplier violates m(-k) = conj(m(k)) at k=" + std::to_string(k));
    out[static_cast<std::size_t>(k)] = mk * f.coeffs()[static_cast<std::size_t>(k)];
  }
  out[0] = cplx(out[0].real(), 0.0);
  return FourierField(f.grid(), std::move(out));
}

namespace symbol {

cplx heat(int k, double t) { return std::exp(-t * static_cast<double>(k) * k); }

double parametrix(int k) {
  if (k == 0) return -1.0;
  const double k2 = static_cast<double>(k) * k;
  return std::expm1(-k2) / k2;
}

}  // namespace symbol

namespace {

// Fast path for real-even or odd-imaginary multipliers known to be Hermitian.
template <class F>
FourierField scale_modes(const FourierField& f, F&& m) {
  std::vector<cplx> out(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= m(static_cast<int>(k));
  out[0] = cplx(out[0].real(), 0.0);
  return FourierField(f.grid(), std::move(out));
}

}  // namespace

FourierField laplacian(const FourierField& f) { return scale_modes(f, symbol::laplacian); }

FourierField gradient(const FourierField& f) { return scale_modes(f, symbol::gradient); }

FourierField heat_flow(const FourierField& f, double t) {
  return scale_modes(f, [t](int k) { return symbol::heat(k, t); });
}

FourierField parametrix_inverse(const FourierField& f) {
  FourierField g = scale_modes(f, [](int k) { return cplx(symbol::parametrix(k)); });
#ifndef NDEBUG
  const FourierField defect = laplacian(g) + heat_flow(f, 1.0) - f;
  const double scale = std::max(1.0, sup_norm(f));
  for (cplx c : defect.coeffs()) assert(std::abs(c) <= 1e-13 * scale * (1 + f.max_mode()));
#endif
  return g;
}

FourierField product(const FourierField& f, const FourierField& g) {
  require_same_grid(f, g, "product");
  std::vector<double> a = f.values();
  const std::vector<double> b = g.values();
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= b[j];
  return FourierField::from_values(f.grid(), a);
}

// ---------------------------------------------------------------------------
// Littlewood–Paley

int lp_block_index(int k) noexcept {
  const int a = std::abs(k);
  if (a <= 1) return -1;
  // 2^j < a <= 2^{j+1}  ⇔  j = ceil(log2 a) - 1
  return static_cast<int>(std::bit_width(static_cast<unsigned>(a - 1))) - 1;
}

int lp_last_block(int max_mode) noexcept { return lp_block_index(max_mode); }

std::pair<int, int> lp_block_range(int j, int max_mode) noexcept {
  if (j < -1) return {1, 0};
  if (j == -1) return {0, std::min(1, max_mode)};
  if (j >= 30) return {1, 0};
  const int lo = (1 << j) + 1;
  const int hi = std::min(1 << (j + 1), max_mode);
  return {lo, hi};
}

FourierField lp_block(const FourierField& f, int j) {
  if (j < -1) throw ParameterError("Littlewood-Paley index must be >= -1");
  FourierField out(f.grid());
  const auto [lo, hi] = lp_block_range(j, f.max_mode());
  for (int k = lo; k <= hi; ++k) out.set_coeff(k, f.coeffs()[static_cast<std::size_t>(k)]);
  return out;
}

FourierField lp_partial_sum(const FourierField& f, int j) {
  if (j < -1) return FourierField(f.grid());
  const int hi = lp_block_range(j, f.max_mode()).second;
  if (j >= 0 && hi < lp_block_range(j, f.max_mode()).first) return f.low_pass(f.max_mode());
  return f.low_pass(j == -1 ? 1 : std::min(1 << (j + 1), f.max_mode()));
}

BesovSpec BesovSpec::sobolev(double beta) { return {beta, 2.0, 2.0}; }

BesovSpec BesovSpec::holder(double beta) {
  const double inf = std::numeric_limits<double>::infinity();
  return {beta, inf, inf};
}

namespace {

double grid_lp_norm(const std::vector<double>& v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
}

}  // namespace

double besov_norm(const FourierField& f, const BesovSpec& spec) {
  if (spec.p < 1.0 || spec.q < 1.0) throw ParameterError("Besov exponents p, q must lie in [1, inf]");
  const int last = lp_last_block(f.max_mode());
  double acc = 0.0;
  for (int j = -1; j <= last; ++j) {
    const double block = grid_lp_norm(lp_block(f, j).values(), spec.p);
    const double term = std::pow(2.0, spec.beta * j) * block;
    if (std::isinf(spec.q))
      acc = std::max(acc, term);
    else
      acc += std::pow(term, spec.q);
  }
  return std::isinf(spec.q) ? acc : std::pow(acc, 1.0 / spec.q);
}

double holder_norm(const FourierField& f, double beta) { return besov_norm(f, BesovSpec::holder(beta)); }

double sobolev_norm(const FourierField& f, double beta) {
  double s = 0.0;
  const auto c = f.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double w = std::pow(1.0 + static_cast<double>(k * k), beta);
    s += (k == 0 ? 1.0 : 2.0) * w * std::norm(c[k]);
  }
  return std::sqrt(s);
}

double l2_norm(const FourierField& f) { return sobolev_norm(f, 0.0); }

double sup_norm(const FourierField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace brox
