#include "brox/generator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/IterativeSolvers>

#include "brox/errors.hpp"
#include "brox/fft.hpp"

// ---------------------------------------------------------------------------
// Matrix-free operator for Eigen's GMRES

namespace brox::detail {
class ResolventOperator;
}

namespace Eigen::internal {
template <>
struct traits<brox::detail::ResolventOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace brox::detail {

// Real packing of coefficients 0..K with the √2 weight, so the Euclidean norm is the L² norm.
Eigen::VectorXd pack(const FourierField& f) {
  const int K = f.max_mode();
  Eigen::VectorXd v(2 * K + 1);
  v[0] = f.coeff(0).real();
  for (int k = 1; k <= K; ++k) {
    v[2 * k - 1] = std::numbers::sqrt2 * f.coeff(k).real();
    v[2 * k] = std::numbers::sqrt2 * f.coeff(k).imag();
  }
  return v;
}

FourierField unpack(const PeriodicGrid& g, const Eigen::VectorXd& v) {
  FourierField f(g);
  f.set_coeff(0, v[0]);
  for (int k = 1; k <= g.max_mode(); ++k) f.set_coeff(k, cplx(v[2 * k - 1], v[2 * k]) * inv_sqrt2);
  return f;
}

class ResolventOperator : public Eigen::EigenBase<ResolventOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  ResolventOperator(const GeneratorHandle& h, const GammaOptions& g) : h_(h), gamma_(g) {}

  Eigen::Index rows() const { return 2 * h_.grid().max_mode() + 1; }
  Eigen::Index cols() const { return rows(); }

  template <typename Rhs>
  Eigen::Product<ResolventOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<ResolventOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  FourierField precondition(const FourierField& y) const {
    const double c = h_.c_shift();
    return apply_multiplier(y, [c](int k) { return cplx(1.0 / (-0.5 * k * k - c)); });
  }

  /// (𝓛 - c)Γ(P⁻¹y).
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const {
    const FourierField us = precondition(unpack(h_.grid(), y));
    const ParacontrolledFunction u = h_.gamma(us, gamma_);
    return pack(apply_L_expanded(u, h_) - h_.c_shift() * u.u);
  }

 private:
  const GeneratorHandle& h_;
  GammaOptions gamma_;
};

}  // namespace brox::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<brox::detail::ResolventOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<brox::detail::ResolventOperator, Rhs,
                                generic_product_impl<brox::detail::ResolventOperator, Rhs>> {
  using Scalar = typename Product<brox::detail::ResolventOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const brox::detail::ResolventOperator& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace brox {

// ---------------------------------------------------------------------------
// Handle

struct GeneratorHandle::Cache {
  BlockDecomposition xi;
  BlockDecomposition Y;
  BlockDecomposition S1_tail;
  BlockDecomposition S2_tail;
  BlockDecomposition S_low;         // S₁ˡ + S₂ˡ
  BlockDecomposition para_xi_dX1t;  // P_ξ∇X₁ᵗ
  BlockDecomposition para_xi_dX1l;  // P_ξ∇X₁ˡ
  FourierField res_dX1t;            // Π(∇X₁ᵗ, ξ)
  FourierField res_dX1l;            // Π(∇X₁ˡ, ξ)
  FourierField X1_tail;
  FourierField X2_tail;

  explicit Cache(const EnhancedNoise& Xi, const ReferenceSplit& s)
      : xi(Xi.xi),
        Y(Xi.resonant),
        S1_tail(s.X1_tail.source),
        S2_tail(s.X2_tail.source),
        S_low(s.X1_low.source + s.S2_low),
        para_xi_dX1t(para(Xi.xi, gradient(s.X1_tail.value))),
        para_xi_dX1l(para(Xi.xi, gradient(s.X1_low.value))),
        res_dX1t(resonant(gradient(s.X1_tail.value), Xi.xi)),
        res_dX1l(resonant(gradient(s.X1_low.value), Xi.xi)),
        X1_tail(s.X1_tail.value),
        X2_tail(s.X2_tail.value) {}
};

GeneratorHandle::GeneratorHandle(EnhancedNoise Xi, int N, double c_shift, LevelPolicy policy)
    : xi_(std::make_shared<const EnhancedNoise>(std::move(Xi))), c_(c_shift) {
  if (!(c_shift > 0)) throw ParameterError("resolvent shift c must be positive");
  map_ = std::make_shared<const ParacontrolledMap>(*xi_, N, policy);
  const double r = lipschitz_ratio(*map_, probe_fields(xi_->grid(), 20, 20240601, 2.0));
  if (r > 0.5)
    throw ThresholdError("reference level N=" + std::to_string(N) + " below the contraction threshold (ratio " +
                         std::to_string(r) + ")");
  cache_ = std::make_shared<const Cache>(*xi_, map_->split());
}

GeneratorHandle GeneratorHandle::at_threshold(EnhancedNoise Xi, double c_shift) {
  const int N = estimate_N_Xi(Xi);
  return GeneratorHandle(std::move(Xi), N, c_shift);
}

const WeightSpectrum& GeneratorHandle::weight() const {
  if (!weight_) weight_ = std::make_shared<const WeightSpectrum>(weight_coefficients(xi_->W));
  return *weight_;
}

// ---------------------------------------------------------------------------
// Expanded generator
//
// With a = ∇u, tails t and low parts l of the sources at level N, Y = Π(∇X₁, ξ):
//   𝓛u = ½Δu♯ + P_ξ∇u♯ + Π(∇u♯, ξ) + P_Y a + Π(a, Y)
//      + C∇(a, X₁ᵗ, ξ) + Π(∇P̃_a X₂ᵗ, ξ) + S∇(a, X₁ᵗ, ξ) + P_ξ∇P̃_a X₂ᵗ + e^Δ P_a(S₁ᵗ + S₂ᵗ)
//      + P_a(S₁ˡ + S₂ˡ) - a·Π(∇X₁ˡ, ξ) - P_a P_ξ∇X₁ˡ.

FourierField apply_L_expanded(const ParacontrolledFunction& u, const GeneratorHandle& h, DefectVariant variant) {
  require_same_grid(u.u, h.Xi().xi, "apply_L_expanded");
  if (u.n != h.Xi().n || u.N != h.N())
    throw LevelError("apply_L_expanded: function built against level (n=" + std::to_string(u.n) + ", N=" +
                     std::to_string(u.N) + "), handle has (n=" + std::to_string(h.Xi().n) + ", N=" +
                     std::to_string(h.N()) + ")");
  const auto& c = h.cache();
  const FourierField a = gradient(u.u);
  const BlockDecomposition ba(a);
  const BlockDecomposition bds(gradient(u.u_sharp));

  FourierField out = 0.5 * laplacian(u.u_sharp);
  out += para(c.xi, bds) + resonant(bds, c.xi);
  out += para(c.Y, ba) + resonant(ba, c.Y);

  const FourierField pa_s1 = para(ba, c.S1_tail);
  const FourierField pa_s2 = para(ba, c.S2_tail);
  const BlockDecomposition dpt1(gradient(-2.0 * parametrix_inverse(pa_s1)));
  const BlockDecomposition dpt2(gradient(-2.0 * parametrix_inverse(pa_s2)));

  out += resonant(dpt1, c.xi) - product(a, c.res_dX1t);          // C∇(a, X₁ᵗ, ξ)
  out += resonant(dpt2, c.xi);                                    // Π(∇P̃_a X₂ᵗ, ξ)
  out += para(c.xi, dpt1) - para(ba, c.para_xi_dX1t);            // S∇(a, X₁ᵗ, ξ)
  out += para(c.xi, dpt2);                                        // P_ξ∇P̃_a X₂ᵗ
  if (variant == DefectVariant::source_term)
    out += heat_flow(pa_s1 + pa_s2, 1.0);
  else
    out -= heat_flow(para(a, c.X1_tail) + para(a, c.X2_tail), 1.0);
  out += para(ba, c.S_low) - product(a, c.res_dX1l) - para(ba, c.para_xi_dX1l);
  return out;
}

FourierField apply_L_direct(const FourierField& u, const FourierField& xi_n) {
  return 0.5 * laplacian(u) + product(xi_n, gradient(u));
}

namespace {

PeriodicGrid padded_grid(int max_mode) {
  return PeriodicGrid(std::bit_ceil(3 * static_cast<std::size_t>(max_mode) + 1), max_mode);
}

}  // namespace

FourierField apply_L_untruncated(const FourierField& u, const FourierField& xi_n) {
  require_same_grid(u, xi_n, "apply_L_untruncated");
  const int kmax = bandwidth(u) + bandwidth(xi_n);
  const PeriodicGrid g = padded_grid(std::max({kmax, u.max_mode(), 1}));
  const FourierField up = u.resampled(g);
  return 0.5 * laplacian(up) + product(xi_n.resampled(g), gradient(up));
}

FourierField apply_L_symmetric_form(const FourierField& u, const FourierField& W_n) {
  const WeightSpectrum w = weight_coefficients(W_n);
  const std::size_t points = std::bit_ceil(4 * static_cast<std::size_t>(w.band() + u.max_mode()) + 1);
  auto du = gradient(u).values_on(points);
  const auto wv = W_n.values_on(points);
  for (std::size_t i = 0; i < points; ++i) du[i] *= std::exp(2.0 * wv[i]);
  std::vector<cplx> half(points / 2 + 1);
  fft::forward(du, half);
  for (std::size_t k = 0; k < half.size(); ++k) half[k] *= cplx(0.0, static_cast<double>(k));
  half.back() = 0.0;  // Nyquist mode has no real derivative
  std::vector<double> flux(points);
  fft::backward(half, flux);
  for (std::size_t i = 0; i < points; ++i) flux[i] *= 0.5 * std::exp(-2.0 * wv[i]);
  fft::forward(flux, half);
  FourierField out(u.grid());
  out.set_coeff(0, half[0].real());
  for (int k = 1; k <= u.max_mode(); ++k) out.set_coeff(k, half[static_cast<std::size_t>(k)]);
  return out;
}

double form_value(const FourierField& u, const FourierField& v, const GeneratorHandle& h) {
  return -weighted_integral(apply_L_untruncated(u, h.Xi().xi), v, h.weight()) / h.weight().mass();
}

double dirichlet_form(const FourierField& u, const FourierField& v, const WeightSpectrum& w) {
  return 0.5 * weighted_integral(gradient(u), gradient(v), w) / w.mass();
}

// ---------------------------------------------------------------------------
// Resolvent

ResolventResult resolvent_solve(const FourierField& f, const GeneratorHandle& h, const ResolventOptions& opt) {
  require_same_grid(f, h.Xi().xi, "resolvent_solve");
  const detail::ResolventOperator op(h, opt.gamma);
  Eigen::GMRES<detail::ResolventOperator, Eigen::IdentityPreconditioner> gmres;
  gmres.compute(op);
  gmres.setTolerance(0.1 * opt.tolerance);
  gmres.setMaxIterations(opt.max_iterations);
  gmres.set_restart(opt.restart);
  const Eigen::VectorXd rhs = detail::pack(f);
  const Eigen::VectorXd y = gmres.solve(rhs);

  ResolventResult res;
  res.iterations = static_cast<int>(gmres.iterations());
  res.u = h.gamma(op.precondition(detail::unpack(h.grid(), y)), opt.gamma);
  const double fn = std::max(l2_norm(f), 1e-300);
  res.residual = l2_norm(apply_L_expanded(res.u, h) - h.c_shift() * res.u.u - f) / fn;
  if (!(res.residual <= opt.tolerance))
    throw ConvergenceError("resolvent GMRES stagnated: relative residual " + std::to_string(res.residual),
                           res.residual);
  return res;
}

Eigen::MatrixXcd galerkin_matrix(const FourierField& xi_n) {
  const int K = xi_n.max_mode();
  const int n = bandwidth(xi_n);
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    L(k + K, k + K) += -0.5 * k * k;
    for (int l = std::max(-K, k - n); l <= std::min(K, k + n); ++l)
      L(k + K, l + K) += xi_n.coeff(k - l) * cplx(0.0, l);
  }
  return L;
}

FourierField resolvent_dense(const FourierField& f, const FourierField& xi_n, double c) {
  require_same_grid(f, xi_n, "resolvent_dense");
  const int K = f.max_mode();
  Eigen::MatrixXcd A = galerkin_matrix(xi_n);
  A.diagonal().array() -= c;
  Eigen::VectorXcd rhs(2 * K + 1);
  for (int k = -K; k <= K; ++k) rhs[k + K] = f.coeff(k);
  const Eigen::VectorXcd sol = A.partialPivLu().solve(rhs);
  FourierField u(f.grid());
  u.set_coeff(0, sol[K].real());
  for (int k = 1; k <= K; ++k) u.set_coeff(k, sol[k + K]);
  return u;
}

// ---------------------------------------------------------------------------
// Convergence and graph-norm tables

namespace {

double l2_inner(const FourierField& a, const FourierField& b) {
  double s = (a.coeff(0) * std::conj(b.coeff(0))).real();
  for (int k = 1; k <= a.max_mode(); ++k) s += 2.0 * (a.coeff(k) * std::conj(b.coeff(k))).real();
  return s;
}

}  // namespace

std::vector<ConvergenceRow> convergence_LnGamman(const FourierField& u_sharp, const NoiseRealization& noise,
                                                 const PeriodicGrid& grid, double alpha,
                                                 const std::vector<int>& levels, int reference) {
  const EnhancedNoise ref = enhance(noise, reference, alpha, grid);
  const int N = estimate_N_Xi(ref);
  const GammaOptions gopt{1e-13, 200};
  const FourierField u_ref = ParacontrolledMap(ref, N).gamma(u_sharp, gopt).u;
  const FourierField Lu_ref = apply_L_direct(u_ref, ref.xi);
  const double form_ref = l2_inner(Lu_ref, u_ref);

  std::vector<ConvergenceRow> rows;
  for (int n : levels) {
    const EnhancedNoise Xi = enhance(noise, n, alpha, grid);
    const FourierField u = ParacontrolledMap(Xi, N, LevelPolicy::clamp).gamma(u_sharp, gopt).u;
    const FourierField Lu = apply_L_direct(u, Xi.xi);
    ConvergenceRow r;
    r.n = n;
    r.error = l2_norm(Lu_ref - Lu);
    r.distance = enhanced_distance(ref, Xi).total();
    r.ratio = r.distance > 0 ? r.error / r.distance : 0.0;
    r.form_gap = std::abs(l2_inner(Lu, u) - form_ref);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResolventConvergenceRow> resolvent_convergence(const FourierField& f, const NoiseRealization& noise,
                                                           const PeriodicGrid& grid, double alpha,
                                                           const std::vector<int>& levels, int reference,
                                                           double c_shift, const ResolventOptions& opt) {
  EnhancedNoise ref = enhance(noise, reference, alpha, grid);
  const int N = estimate_N_Xi(ref);
  const GeneratorHandle href(ref, N, c_shift);
  const FourierField u_ref = resolvent_solve(f, href, opt).u.u;

  std::vector<ResolventConvergenceRow> rows;
  for (int n : levels) {
    EnhancedNoise Xi = enhance(noise, n, alpha, grid);
    const double dist = enhanced_distance(ref, Xi).total();
    const GeneratorHandle h(std::move(Xi), N, c_shift, LevelPolicy::clamp);
    const FourierField u = resolvent_solve(f, h, opt).u.u;
    ResolventConvergenceRow r;
    r.n = n;
    r.error = sobolev_norm(u_ref - u, 1.0);
    r.distance = dist;
    r.ratio = dist > 0 ? r.error / dist : 0.0;
    rows.push_back(r);
  }
  return rows;
}

std::vector<GraphNormRow> graph_norm_check(const std::vector<FourierField>& u_sharp_probes, const GeneratorHandle& h) {
  std::vector<GraphNormRow> rows;
  for (const auto& us : u_sharp_probes) {
    const ParacontrolledFunction u = h.gamma(us);
    const double l2 = l2_norm(u.u);
    GraphNormRow r;
    r.domain_norm = std::hypot(l2, sobolev_norm(h.map().phi(u.u), 2.0));
    r.graph_norm = std::hypot(l2, l2_norm(apply_L_expanded(u, h)));
    r.ratio = r.domain_norm / r.graph_norm;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace brox
