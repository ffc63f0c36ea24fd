#include "brox/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "brox/errors.hpp"
#include "brox/generator.hpp"
#include "brox/noise.hpp"

namespace brox {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<std::size_t> all_rows(std::size_t points) {
  std::vector<std::size_t> r(points);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Assembly

double WeightedGalerkin::symmetry_defect() const {
  const double scale = std::max(stiffness.cwiseAbs().maxCoeff(), mass.cwiseAbs().maxCoeff());
  const double d = std::max((stiffness - stiffness.transpose()).cwiseAbs().maxCoeff(),
                            (mass - mass.transpose()).cwiseAbs().maxCoeff());
  return d / scale;
}

namespace {

// Mass matrix ∫φ_iφ_j w over a set, from its moments C(p) = ∫cos(px) w and S(p) = ∫sin(px) w.
template <class Cf, class Sf>
Eigen::MatrixXd mass_from_moments(int Kb, Cf C, Sf S) {
  const int nb = 2 * Kb + 1;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb, nb);
  B(0, 0) = C(0);
  for (int k = 1; k <= Kb; ++k) {
    const int ck = 2 * k - 1, sk = 2 * k;
    B(0, ck) = B(ck, 0) = std::numbers::sqrt2 * C(k);
    B(0, sk) = B(sk, 0) = std::numbers::sqrt2 * S(k);
    for (int l = 1; l <= Kb; ++l) {
      const int cl = 2 * l - 1, sl = 2 * l;
      B(ck, cl) = C(k - l) + C(k + l);
      B(sk, sl) = C(k - l) - C(k + l);
      B(ck, sl) = S(k + l) - S(k - l);
      B(sl, ck) = B(ck, sl);
    }
  }
  return B;
}

}  // namespace

WeightedGalerkin assemble_weighted(const WeightSpectrum& w, int Kb) {
  if (Kb < 1) throw ParameterError("basis must contain at least one mode pair");
  auto C = [&](int p) { return two_pi * w.coeff(std::abs(p)).real(); };
  auto S = [&](int p) { return p >= 0 ? -two_pi * w.coeff(p).imag() : two_pi * w.coeff(-p).imag(); };
  const int nb = 2 * Kb + 1;
  WeightedGalerkin g;
  g.basis_modes = Kb;
  g.weight = w;
  g.mass = mass_from_moments(Kb, C, S);
  g.stiffness = Eigen::MatrixXd::Zero(nb, nb);
  auto& A = g.stiffness;
  for (int k = 1; k <= Kb; ++k) {
    const int ck = 2 * k - 1, sk = 2 * k;
    for (int l = 1; l <= Kb; ++l) {
      const int cl = 2 * l - 1, sl = 2 * l;
      const double kl = 0.5 * k * l;
      A(ck, cl) = kl * (C(k - l) - C(k + l));
      A(sk, sl) = kl * (C(k - l) + C(k + l));
      A(ck, sl) = -kl * (S(k + l) + S(k - l));
      A(sl, ck) = A(ck, sl);
    }
  }
  return g;
}

Eigen::MatrixXd arc_mass(const WeightSpectrum& w, int Kb, double a, double b) {
  std::vector<cplx> m(static_cast<std::size_t>(2 * Kb + 1));
  for (int p = 0; p <= 2 * Kb; ++p) m[static_cast<std::size_t>(p)] = arc_moment(w, p, a, b);
  auto C = [&](int p) { return m[static_cast<std::size_t>(std::abs(p))].real(); };
  auto S = [&](int p) { return p >= 0 ? m[static_cast<std::size_t>(p)].imag() : -m[static_cast<std::size_t>(-p)].imag(); };
  return mass_from_moments(Kb, C, S);
}

WeightedGalerkin assemble_weighted(const FourierField& W_n, int Kb) {
  return assemble_weighted(weight_coefficients(W_n), Kb);
}

WeightedGalerkin assemble_ground_state(const FourierField& W_n, int Kb) {
  if (Kb < 1) throw ParameterError("basis must contain at least one mode pair");
  // Expanding the square: A = ½(∫φ_i'φ_j' + ∫φ_iφ_j V) with V = ξ² + ξ', ξ = Wₙ'.
  const int n = bandwidth(W_n);
  std::vector<cplx> xi(static_cast<std::size_t>(n) + 1), v(2 * static_cast<std::size_t>(n) + 1);
  for (int k = 1; k <= n; ++k) xi[static_cast<std::size_t>(k)] = cplx(0.0, k) * W_n.coeff(k);
  auto xi_at = [&](int k) { return k >= 0 ? xi[static_cast<std::size_t>(k)] : std::conj(xi[static_cast<std::size_t>(-k)]); };
  for (int p = 0; p <= 2 * n; ++p) {
    cplx acc = p <= n ? cplx(0.0, p) * xi_at(p) : cplx{};
    for (int k = std::max(-n, p - n); k <= std::min(n, p + n); ++k) acc += xi_at(k) * xi_at(p - k);
    v[static_cast<std::size_t>(p)] = acc;
  }
  auto vc = [&](int p) { return std::abs(p) <= 2 * n ? v[static_cast<std::size_t>(std::abs(p))] : cplx{}; };
  auto C = [&](int p) { return two_pi * vc(p).real(); };
  auto S = [&](int p) { return p >= 0 ? -two_pi * vc(p).imag() : two_pi * vc(p).imag(); };
  WeightedGalerkin g;
  g.basis_modes = Kb;
  g.weight = weight_coefficients(W_n);
  g.ground_state = W_n;
  const int nb = 2 * Kb + 1;
  g.mass = two_pi * Eigen::MatrixXd::Identity(nb, nb);
  g.stiffness = mass_from_moments(Kb, C, S);
  for (int k = 1; k <= Kb; ++k) {
    g.stiffness(2 * k - 1, 2 * k - 1) += two_pi * k * k;
    g.stiffness(2 * k, 2 * k) += two_pi * k * k;
  }
  g.stiffness *= 0.5;
  return g;
}

Eigen::MatrixXd basis_values_at(int Kb, const std::vector<double>& x) {
  Eigen::MatrixXd P(static_cast<Eigen::Index>(x.size()), 2 * Kb + 1);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    P(r, 0) = 1.0;
    const cplx step = std::polar(1.0, x[j]);
    cplx z = step;
    for (int k = 1; k <= Kb; ++k, z *= step) {
      P(r, 2 * k - 1) = std::numbers::sqrt2 * z.real();
      P(r, 2 * k) = std::numbers::sqrt2 * z.imag();
    }
  }
  return P;
}

Eigen::MatrixXd basis_values(int Kb, std::size_t points) {
  std::vector<double> x(points);
  for (std::size_t j = 0; j < points; ++j) x[j] = two_pi * static_cast<double>(j) / static_cast<double>(points);
  return basis_values_at(Kb, x);
}

namespace {

// ∂ₓφ_i at the nodes.
Eigen::MatrixXd basis_derivatives(int Kb, std::size_t points) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points), 2 * Kb + 1);
  for (std::size_t j = 0; j < points; ++j) {
    const double x = two_pi * static_cast<double>(j) / static_cast<double>(points);
    for (int k = 1; k <= Kb; ++k) {
      D(static_cast<Eigen::Index>(j), 2 * k - 1) = -std::numbers::sqrt2 * k * std::sin(k * x);
      D(static_cast<Eigen::Index>(j), 2 * k) = std::numbers::sqrt2 * k * std::cos(k * x);
    }
  }
  return D;
}

// e^{sign·Wₙ} at the equispaced nodes; ones for the Fourier basis.
Eigen::VectorXd node_factors(const std::optional<FourierField>& W, std::size_t points, double sign) {
  Eigen::VectorXd f = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(points));
  if (!W) return f;
  for (std::size_t j = 0; j < points; ++j)
    f[static_cast<Eigen::Index>(j)] = std::exp(sign * W->evaluate(two_pi * static_cast<double>(j) / static_cast<double>(points)));
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Eigenproblem

SpectralDecomposition eigendecompose(const WeightedGalerkin& g, int n) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(g.stiffness, g.mass);
  if (es.info() != Eigen::Success) throw ConvergenceError("generalized eigensolver failed", 0.0);
  SpectralDecomposition d;
  d.n = n;
  d.eigenvalues = -es.eigenvalues();  // ascending μ → descending λ
  d.coeffs = es.eigenvectors();
  d.weight = g.weight;
  d.ground_state = g.ground_state;
  d.gap = d.eigenvalues.size() > 1 ? d.eigenvalues[0] - d.eigenvalues[1] : 0.0;
  // Sign convention: e₁ > 0.
  if (d.coeffs(0, 0) < 0) d.coeffs.col(0) *= -1.0;
  return d;
}

Eigen::MatrixXd SpectralDecomposition::eigenfunctions(std::size_t points, int count) const {
  const Eigen::Index m = count < 0 ? coeffs.cols() : count;
  Eigen::MatrixXd E = basis_values(basis_modes(), points) * coeffs.leftCols(m);
  if (ground_state) E = node_factors(ground_state, points, -1.0).asDiagonal() * E;
  return E;
}

double SpectralDecomposition::e1_constancy(std::size_t points) const {
  const Eigen::VectorXd e1 = eigenfunctions(points, 1).col(0);
  const double mean = e1.mean();
  return (e1.array() - mean).abs().maxCoeff() / std::abs(mean);
}

double SpectralDecomposition::orthonormality_defect(const WeightedGalerkin& g, int count) const {
  const Eigen::Index m = count < 0 ? coeffs.cols() : count;
  const Eigen::MatrixXd V = coeffs.leftCols(m);
  return (V.transpose() * g.mass * V - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
}

Eigen::VectorXcd galerkin_eigenvalues(const FourierField& xi_n) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(galerkin_matrix(xi_n), false);
  Eigen::VectorXcd ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), [](cplx a, cplx b) { return a.real() > b.real(); });
  return ev;
}

// ---------------------------------------------------------------------------
// Heat kernels

double HeatKernel::x(std::size_t i) const { return two_pi * static_cast<double>(rows[i]) / static_cast<double>(points); }
double HeatKernel::y(std::size_t j) const { return two_pi * static_cast<double>(j) / static_cast<double>(points); }

double HeatKernel::row_sum_defect() const {
  const double h = two_pi / static_cast<double>(points);
  return ((values.rowwise().sum() * h).array() - 1.0).abs().maxCoeff();
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& P, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), P.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = P.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

// p(x, y) = left(x) Σ φ(x)·(coefficients)·φ(y) right(y): e^{-W(x)} and e^{W(y)} in the ground-state
// basis, 1 and e^{2W(y)} in the Fourier basis.
Eigen::VectorXd left_factors(const std::optional<FourierField>& W, std::size_t points) {
  return node_factors(W, points, -1.0);
}

Eigen::VectorXd right_factors(const std::optional<FourierField>& W, const WeightSpectrum& w, std::size_t points) {
  if (W) return node_factors(W, points, 1.0);
  const auto wv = w.values_on(points);
  return Eigen::Map<const Eigen::VectorXd>(wv.data(), static_cast<Eigen::Index>(points));
}

void check_quadrature(int Kb, const WeightSpectrum& w, std::size_t points) {
  if (points < 2 * static_cast<std::size_t>(Kb) + static_cast<std::size_t>(w.band()) + 1)
    throw WeightTailError("kernel grid of " + std::to_string(points) + " points cannot integrate e_m e_m' e^{2W} exactly");
}

}  // namespace

Eigen::VectorXd semigroup_decay(const SpectralDecomposition& dec, double t) {
  return (t * dec.eigenvalues.array()).exp().unaryExpr([](double x) { return x < 1e-150 ? 0.0 : x; }).matrix();
}

HeatKernel heat_kernel_eigen(const SpectralDecomposition& dec, double t, std::size_t points, std::vector<std::size_t> rows) {
  if (!(t > 0)) throw ParameterError("heat kernel needs t > 0");
  check_quadrature(dec.basis_modes(), dec.weight, points);
  if (rows.empty()) rows = all_rows(points);
  const Eigen::MatrixXd R = basis_values(dec.basis_modes(), points) * dec.coeffs;
  const Eigen::VectorXd decay = semigroup_decay(dec, t);
  HeatKernel k;
  k.t = t;
  k.rows = rows;
  k.points = points;
  const Eigen::VectorXd f = rows_of(left_factors(dec.ground_state, points), rows).col(0);
  const Eigen::VectorXd h = right_factors(dec.ground_state, dec.weight, points);
  const Eigen::MatrixXd L = f.asDiagonal() * rows_of(R, rows) * decay.asDiagonal();
  k.values.noalias() = L * R.transpose();
  k.values = k.values * h.asDiagonal();
  const Eigen::VectorXd r = (R.array().square().matrix() * decay).cwiseSqrt();
  const double nu = static_cast<double>(R.cols()) * std::numeric_limits<double>::epsilon();
  k.noise = nu * (f.cwiseProduct(rows_of(r, rows).col(0))) * h.cwiseProduct(r).transpose();
  return k;
}

Eigen::MatrixXd semigroup_matrix(const SpectralDecomposition& dec, const WeightedGalerkin& g, double t) {
  const Eigen::VectorXd decay = semigroup_decay(dec, t);
  return dec.coeffs * decay.asDiagonal() * dec.coeffs.transpose() * g.mass;
}

Eigen::MatrixXd resolvent_power_matrix(const WeightedGalerkin& g, double t, int steps, double c) {
  if (!(t > 0) || steps < 1) throw ParameterError("resolvent power needs t > 0 and at least one step");
  const double s = t / steps;
  const Eigen::MatrixXd lhs = g.mass + s * (c * g.mass + g.stiffness);
  Eigen::MatrixXd R = lhs.partialPivLu().solve(g.mass);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(R.rows(), R.cols());
  for (int e = steps; e > 0; e >>= 1) {
    if (e & 1) acc = acc * R;
    if (e > 1) R = R * R;
  }
  return std::exp(t * c) * acc;
}

HeatKernel kernel_from_matrix(const Eigen::MatrixXd& T, const WeightedGalerkin& g, double t, std::size_t points,
                              std::vector<std::size_t> rows, KernelMode mode) {
  check_quadrature(g.basis_modes, g.weight, points);
  if (rows.empty()) rows = all_rows(points);
  const Eigen::MatrixXd P = basis_values(g.basis_modes, points);
  // p(x, y) = Σ φ_i(x) (T B⁻¹)_ij φ_j(y) w(y)
  const Eigen::MatrixXd TBinv = g.mass.ldlt().solve(T.transpose()).transpose();
  HeatKernel k;
  k.t = t;
  k.mode = mode;
  k.rows = rows;
  k.points = points;
  const Eigen::MatrixXd L = rows_of(left_factors(g.ground_state, points), rows).col(0).asDiagonal() * rows_of(P, rows) * TBinv;
  k.values.noalias() = L * P.transpose();
  k.values = k.values * right_factors(g.ground_state, g.weight, points).asDiagonal();
  return k;
}

HeatKernel semigroup_resolvent_power(const WeightedGalerkin& g, double t, int steps, std::size_t points,
                                     std::vector<std::size_t> rows, double c_shift) {
  return kernel_from_matrix(resolvent_power_matrix(g, t, steps, c_shift), g, t, points, std::move(rows),
                            KernelMode::resolvent_power);
}

double chapman_kolmogorov_defect(const HeatKernel& ps, const HeatKernel& pt, const HeatKernel& pst) {
  if (pt.values.rows() != static_cast<Eigen::Index>(pt.points))
    throw ParameterError("Chapman-Kolmogorov needs the middle kernel on the full grid");
  const double h = two_pi / static_cast<double>(ps.points);
  const Eigen::MatrixXd comp = h * ps.values * pt.values;
  return (comp - pst.values).cwiseAbs().maxCoeff() / pst.values.cwiseAbs().maxCoeff();
}

double detailed_balance_defect(const HeatKernel& p, const WeightSpectrum& w) {
  if (p.values.rows() != static_cast<Eigen::Index>(p.points))
    throw ParameterError("detailed balance needs a full-grid kernel");
  const auto wv = w.values_on(p.points);
  const Eigen::Map<const Eigen::VectorXd> wm(wv.data(), static_cast<Eigen::Index>(p.points));
  const Eigen::MatrixXd a = wm.asDiagonal() * p.values;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Gaussian bounds

double theta_kernel(double t, double d) {
  double s = 0.0;
  const int images = 3 + static_cast<int>(std::ceil(std::sqrt(t) * 3.0));
  for (int m = -images; m <= images; ++m) {
    const double z = d + two_pi * m;
    s += std::exp(-z * z / (2.0 * t));
  }
  return s / std::sqrt(two_pi * t);
}

double torus_distance(double x, double y) {
  double d = std::fmod(std::abs(x - y), two_pi);
  return std::min(d, two_pi - d);
}

bool GaussianFit::finite() const { return std::isfinite(c_lower) && std::isfinite(c_upper) && c_lower > 0 && c_upper > 0; }

namespace {

// Smallest c in [lo, hi] with pred(c) true, for a predicate monotone in c (false → true).
template <class Pred>
double bisect_log(Pred pred, double lo = 1e-8, double hi = 1e12) {
  if (!pred(hi)) return std::numeric_limits<double>::infinity();
  if (pred(lo)) return lo;
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (a + b);
    (pred(std::exp(m)) ? b : a) = m;
  }
  return std::exp(b);
}

template <class Value>
GaussianFit fit_points(const std::vector<HeatKernel>& kernels, double floor, Value value) {
  GaussianFit fit;
  for (const auto& k : kernels) {
    const double t = k.t;
    double pmax = 0.0, pmin = 0.0;
    for (Eigen::Index i = 0; i < k.values.rows(); ++i)
      for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
        pmax = std::max(pmax, value(k, i, j));
        pmin = std::min(pmin, value(k, i, j));
      }
    // Values within 10x of the largest negative artefact, or of the entry's rounding bound,
    // are noise of the eigen expansion, not kernel mass.
    const double cut = std::max(floor * pmax, -10.0 * pmin);
    const bool bounded = k.noise.size() == k.values.size();
    for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
        const double p = value(k, i, j);
        if (!(p > cut) || (bounded && !(p > 10.0 * k.noise(i, j)))) continue;
        const double d2 = std::pow(torus_distance(k.x(static_cast<std::size_t>(i)), k.y(static_cast<std::size_t>(j))), 2);
        const double lp = std::log(p) + 0.5 * std::log(t);
        // lower: -log c - c d²/t ≤ log p + ½log t
        fit.c_lower = std::max(fit.c_lower, bisect_log([&](double c) { return -std::log(c) - c * d2 / t <= lp; }));
        // upper: log c - d²/(ct) ≥ log p + ½log t
        fit.c_upper = std::max(fit.c_upper, bisect_log([&](double c) { return std::log(c) - d2 / (c * t) >= lp; }));
      }
    }
  }
  return fit;
}

}  // namespace

GaussianFit gaussian_bound_fit(const std::vector<HeatKernel>& kernels, double floor) {
  return fit_points(kernels, floor, [](const HeatKernel& k, Eigen::Index i, Eigen::Index j) { return k.values(i, j); });
}

GaussianFit gaussian_bound_fit_flat(const std::vector<HeatKernel>& kernels, double floor) {
  return fit_points(kernels, floor, [](const HeatKernel& k, Eigen::Index i, Eigen::Index j) {
    return theta_kernel(k.t, torus_distance(k.x(static_cast<std::size_t>(i)), k.y(static_cast<std::size_t>(j))));
  });
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    t[static_cast<std::size_t>(i)] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return t;
}

double strong_feller_norm(const SpectralDecomposition& dec, const WeightedGalerkin& g, double t,
                          const std::vector<double>& f_values, std::size_t eval_points) {
  if (g.ground_state) throw ParameterError("strong Feller norm needs the Fourier basis");
  const std::size_t P = f_values.size();
  const Eigen::MatrixXd Phi = basis_values(g.basis_modes, P);
  const auto wv = g.weight.values_on(std::max(P, std::bit_ceil(2 * static_cast<std::size_t>(g.weight.band()) + 1)));
  const std::size_t stride = wv.size() / P;
  Eigen::VectorXd fw(static_cast<Eigen::Index>(P));
  for (std::size_t j = 0; j < P; ++j) fw[static_cast<Eigen::Index>(j)] = f_values[j] * wv[j * stride];
  const Eigen::VectorXd b = Phi.transpose() * fw * (two_pi / static_cast<double>(P));
  const Eigen::VectorXd decay = semigroup_decay(dec, t);
  const Eigen::VectorXd c = dec.coeffs * (decay.asDiagonal() * (dec.coeffs.transpose() * b));
  const Eigen::VectorXd val = basis_values(g.basis_modes, eval_points) * c;
  const Eigen::VectorXd der = basis_derivatives(g.basis_modes, eval_points) * c;
  return val.cwiseAbs().maxCoeff() + der.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Invariant measure

InvariantMeasure invariant_measure(const FourierField& xi_n, std::size_t points) {
  const FourierField W = potential_of(xi_n);
  const WeightSpectrum w = weight_coefficients(W);
  InvariantMeasure im;
  const double Z = w.mass();
  im.density.resize(points);
  for (std::size_t j = 0; j < points; ++j)
    im.density[j] = std::exp(2.0 * W.evaluate(two_pi * static_cast<double>(j) / static_cast<double>(points))) / Z;

  const int n = bandwidth(xi_n);
  const std::size_t P = std::bit_ceil(4 * static_cast<std::size_t>(w.band() + n + xi_n.max_mode()) + 1);
  const auto f = w.values_on(P);
  WeightSpectrum dw = w;
  for (std::size_t k = 0; k < dw.coeffs.size(); ++k) dw.coeffs[k] *= cplx(0.0, static_cast<double>(k));
  const auto df = dw.values_on(P);
  const auto xv = xi_n.values_on(P);
  double r2 = 0.0, f2 = 0.0;
  for (std::size_t j = 0; j < P; ++j) {
    const double r = df[j] - 2.0 * xv[j] * f[j];
    r2 += r * r;
    f2 += f[j] * f[j];
  }
  im.adjoint_residual = std::sqrt(r2 / f2);

  // ∫(𝓛ₙ e^{ilx}) e^{2W} dx / 2π = -l²/2 ŵ_{-l} + il Σ_k ξ_{k-l} ŵ_{-k}; only modes whose
  // stencil stays inside the retained weight band are tested.
  double r2s = 0.0, s2s = 0.0;
  for (int l = 1; l <= w.band() - n; ++l) {
    cplx r = -0.5 * l * l * std::conj(w.coeff(l));
    double scale = 0.5 * l * l * std::abs(w.coeff(l));
    for (int k = l - n; k <= l + n; ++k) {
      const cplx term = cplx(0.0, l) * xi_n.coeff(k - l) * std::conj(w.coeff(k));
      r += term;
      scale += std::abs(term);
    }
    r2s += std::norm(r);
    s2s += scale * scale;
  }
  im.stationarity = s2s > 0.0 ? std::sqrt(r2s / s2s) : 0.0;
  return im;
}

// ---------------------------------------------------------------------------
// Mixing

double tv_to_invariant(const HeatKernel& p, const WeightSpectrum& w) {
  const auto wv = w.values_on(p.points);
  const double Z = w.mass();
  const double h = two_pi / static_cast<double>(p.points);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < p.values.cols(); ++j) s += std::abs(p.values(i, j) - wv[static_cast<std::size_t>(j)] / Z);
    worst = std::max(worst, 0.5 * h * s);
  }
  return worst;
}

MixingFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 3 || t.size() != y.size()) throw SampleError("mixing fit needs at least three points");
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0;
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0)) throw SampleError("mixing fit: non-positive TV value");
    ly[i] = std::log(y[i]);
    st += t[i];
    sy += ly[i];
  }
  const double mt = st / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - mt) * (t[i] - mt);
    sxy += (t[i] - mt) * (ly[i] - my);
  }
  if (!(sxx > 0)) throw SampleError("mixing fit window is degenerate");
  MixingFit f;
  f.rate = sxy / sxx;
  f.log_C = my - f.rate * mt;
  double rss = 0;
  for (std::size_t i = 0; i < t.size(); ++i) rss += std::pow(ly[i] - f.log_C - f.rate * t[i], 2);
  f.rate_se = std::sqrt(rss / std::max(n - 2.0, 1.0) / sxx);
  f.times = t;
  f.tv = y;
  return f;
}

std::vector<double> mixing_window(const SpectralDecomposition& dec) {
  if (dec.eigenvalues.size() < 3 || !(dec.gap > 0)) throw ParameterError("mixing window needs a positive gap and three modes");
  const double sep = dec.eigenvalues[1] - dec.eigenvalues[2];
  // Degenerate λ₂ = λ₃ decay together and need no damping.
  const double t0 = sep > 1e-6 * dec.gap ? std::max(1.0 / dec.gap, 2.0 / sep) : 1.0 / dec.gap;
  return log_spaced(t0, t0 + 3.0 / dec.gap, 8);
}

MixingFit mixing_rate_kernel(const SpectralDecomposition& dec, const std::vector<double>& times, std::size_t points,
                             std::vector<std::size_t> rows) {
  if (rows.empty())
    for (std::size_t j = 0; j < points; j += std::max<std::size_t>(1, points / 64)) rows.push_back(j);
  std::vector<double> tv;
  for (double t : times) tv.push_back(tv_to_invariant(heat_kernel_eigen(dec, t, points, rows), dec.weight));
  return fit_log_linear(times, tv);
}

// ---------------------------------------------------------------------------
// Finite-dimensional distributions

double fdd_probability(const SpectralDecomposition& dec, const WeightedGalerkin& g, double x0,
                       const std::vector<double>& times, const std::vector<Arc>& sets) {
  if (g.ground_state) throw ParameterError("fdd: needs the Fourier basis");
  if (times.size() != sets.size() || times.empty()) throw ParameterError("fdd: one set per time is required");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ParameterError("fdd: times must increase");
  if (!(times[0] > 0)) throw ParameterError("fdd: times must be positive");
  const int Kb = g.basis_modes;
  const Eigen::MatrixXd& V = dec.coeffs;
  // Backward recursion: g_last = 1, g_i = P_{Δt}(1_{A_i} g_{i+1}) in basis coefficients.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(V.rows());
  f[0] = 1.0;
  for (std::size_t i = times.size(); i-- > 0;) {
    const double dt = times[i] - (i == 0 ? 0.0 : times[i - 1]);
    const Eigen::VectorXd proj = V.transpose() * (sets[i].mass(g.weight, Kb) * f);
    f = V * semigroup_decay(dec, dt).cwiseProduct(proj);
  }
  const Eigen::MatrixXd phi = basis_values_at(Kb, {x0});
  return (phi * f)(0);
}

Eigen::MatrixXd Arc::mass(const WeightSpectrum& w, int Kb) const {
  if (length >= two_pi) return arc_mass(w, Kb, 0.0, two_pi);
  return arc_mass(w, Kb, start, start + length);
}

bool Arc::contains(double x) const {
  if (length >= two_pi) return true;
  double d = std::fmod(x - start, two_pi);
  if (d < 0) d += two_pi;
  return d < length;
}

}  // namespace brox
