#include "brox/diffusion.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "brox/errors.hpp"
#include "brox/rng.hpp"

namespace brox {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double ca = 0.0, cb = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    worst = std::max(worst, std::abs(ca - cb));
  }
  return worst;
}

std::size_t bin_of(double x, std::size_t bins) {
  const auto b = static_cast<std::size_t>(wrap(x) / two_pi * static_cast<double>(bins));
  return std::min(b, bins - 1);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.sd += (x - r.mean) * (x - r.mean);
  r.sd = v.size() > 1 ? std::sqrt(r.sd / static_cast<double>(v.size() - 1)) : 0.0;
  return r;
}

// Per-path bin counts → bootstrap histograms of resampled path sets.
class PathHistograms {
 public:
  PathHistograms(std::size_t paths, std::size_t bins) : bins_(bins), counts_(paths * bins, 0.0) {}
  double* row(std::size_t p) { return counts_.data() + p * bins_; }
  std::size_t paths() const { return counts_.size() / bins_; }

  std::vector<double> histogram(const std::vector<std::size_t>* pick = nullptr) const {
    std::vector<double> h(bins_, 0.0);
    const std::size_t n = pick ? pick->size() : paths();
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = counts_.data() + (pick ? (*pick)[i] : i) * bins_;
      for (std::size_t b = 0; b < bins_; ++b) h[b] += r[b];
    }
    double tot = 0.0;
    for (double x : h) tot += x;
    if (!(tot > 0)) throw SampleError("histogram has no samples");
    for (double& x : h) x /= tot;
    return h;
  }

 private:
  std::size_t bins_;
  std::vector<double> counts_;
};

std::vector<std::size_t> resample(std::size_t n, const BootstrapPlan& boot, std::size_t b) {
  rng::SplitMix64 r(boot.seed, rng::Domain::bootstrap, b);
  std::vector<std::size_t> pick(n);
  for (auto& i : pick) i = static_cast<std::size_t>(r.uniform() * static_cast<double>(n)) % n;
  return pick;
}

void check_bootstrap(const BootstrapPlan& boot) {
  if (boot.resamples < 2) throw ParameterError("bootstrap needs at least two resamples");
}

// ∫_A φ_i w dx for the real basis.
Eigen::VectorXd basis_arc_integrals(const WeightSpectrum& w, int Kb, double a, double b) {
  Eigen::VectorXd m(2 * Kb + 1);
  m[0] = arc_moment(w, 0, a, b).real();
  for (int k = 1; k <= Kb; ++k) {
    const cplx c = arc_moment(w, k, a, b);
    m[2 * k - 1] = std::numbers::sqrt2 * c.real();
    m[2 * k] = std::numbers::sqrt2 * c.imag();
  }
  return m;
}

}  // namespace

double wrap(double x) noexcept {
  double y = std::fmod(x, two_pi);
  if (y < 0) y += two_pi;
  return y >= two_pi ? 0.0 : y;
}

// ---------------------------------------------------------------------------
// Drift and tables

Drift::Drift(const FourierField& xi_n) {
  const int n = std::max(1, xi_n.max_mode());
  int top = 0;
  for (int k = 0; k <= n; ++k)
    if (xi_n.coeff(k) != cplx{}) top = k;
  c_.resize(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) c_[static_cast<std::size_t>(k)] = xi_n.coeff(k);
}

double Drift::operator()(double x) const noexcept {
  const cplx z(std::cos(x), std::sin(x));
  cplx p = z, s{};
  for (std::size_t k = 1; k < c_.size(); ++k) {
    s += c_[k] * p;
    p *= z;
  }
  return c_[0].real() + 2.0 * s.real();
}

double Drift::sup_norm() const {
  const std::size_t P = 16 * (c_.size() + 1);
  double m = 0.0;
  for (std::size_t j = 0; j < P; ++j) m = std::max(m, std::abs((*this)(two_pi * static_cast<double>(j) / static_cast<double>(P))));
  return m;
}

double stable_dt(const FourierField& xi_n) {
  const double s = Drift(xi_n).sup_norm();
  return 0.1 / (1.0 + s * s);
}

Tabulated::Tabulated(const FourierField& f, std::size_t points, double slope)
    : v_(f.values_on(points)), inv_h_(static_cast<double>(points) / two_pi), slope_(slope), mask_(points - 1) {
  if (!std::has_single_bit(points)) throw GridError("table size must be a power of two");
}

double Tabulated::operator()(double x) const noexcept {
  const double u = x * inv_h_;
  const double fl = std::floor(u);
  const double f = u - fl;
  const auto i = static_cast<std::size_t>(static_cast<std::int64_t>(fl));
  const double a = v_[(i - 1) & mask_], b = v_[i & mask_], c = v_[(i + 1) & mask_], d = v_[(i + 2) & mask_];
  const double fm1 = f - 1.0, fm2 = f - 2.0, fp1 = f + 1.0;
  // Increments from the centre node keep constants exact.
  const double val = b - (a - b) * f * fm1 * fm2 / 6.0 - (c - b) * fp1 * f * fm2 / 2.0 + (d - b) * fp1 * f * fm1 / 6.0;
  return val + slope_ * x;
}

// ---------------------------------------------------------------------------
// Simulation

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  const std::size_t T = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  if (T == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < T; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t * count / T; i < (t + 1) * count / T; ++i) body(i);
    });
  for (auto& th : pool) th.join();
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0) || !(T > 0)) throw ParameterError("T and dt must be positive");
  const double r = T / dt;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (std::abs(static_cast<double>(n) - r) > 1e-9 * std::max(1.0, r)) throw ParameterError("T must be a multiple of dt");
  return n;
}

std::size_t PathEnsemble::record_of(double t) const {
  const double r = t / (plan.dt * static_cast<double>(plan.stride));
  const auto i = static_cast<std::size_t>(std::llround(r));
  if (std::abs(static_cast<double>(i) - r) > 1e-9 * std::max(1.0, r) || i >= records())
    throw ParameterError("time " + std::to_string(t) + " is not a recorded time");
  return i;
}

PathEnsemble simulate_em(const FourierField& xi_n, const SimulationPlan& plan) {
  const double limit = stable_dt(xi_n);
  if (plan.dt > limit * (1.0 + 1e-12))
    throw StabilityError("dt = " + std::to_string(plan.dt) + " exceeds the stability bound " + std::to_string(limit));
  if (plan.n_paths == 0 || plan.stride == 0) throw ParameterError("n_paths and stride must be positive");
  PathEnsemble e;
  e.plan = plan;
  e.steps = step_count(plan.T, plan.dt);
  if (e.steps % plan.stride != 0) throw ParameterError("stride must divide the step count");
  const Drift drift(xi_n);
  e.n = drift.level();
  const std::size_t R = e.records();
  e.positions.assign(plan.n_paths * R, 0.0);
  const double sdt = std::sqrt(plan.dt);
  parallel_for(plan.n_paths, plan.threads, [&](std::size_t p) {
    rng::SplitMix64 r(plan.master_seed, rng::Domain::path, p);
    double* out = e.positions.data() + p * R;
    double x = plan.x0;
    out[0] = x;
    for (std::size_t k = 1; k <= e.steps; ++k) {
      x += drift(x) * plan.dt + sdt * r.normal();
      if (k % plan.stride == 0) out[k / plan.stride] = x;
    }
  });
  return e;
}

PathEnsemble simulate_em(const NoiseRealization& noise, int n, const PeriodicGrid& grid, const SimulationPlan& plan) {
  return simulate_em(truncate(noise, n, grid), plan);
}

// ---------------------------------------------------------------------------
// Occupation

double OccupationReport::z() const { return tv_null_se > 0 ? (tv - tv_null_mean) / tv_null_se : 0.0; }

namespace {

PathHistograms occupation_counts(const PathEnsemble& ens, double burn_in, std::size_t bins) {
  std::size_t r0 = 0;
  while (r0 < ens.records() && ens.time(r0) < burn_in - 1e-12) ++r0;
  if (r0 >= ens.records()) throw SampleError("burn-in leaves no samples");
  PathHistograms H(ens.n_paths(), bins);
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    double* row = H.row(p);
    for (std::size_t r = r0; r < ens.records(); ++r) row[bin_of(ens.at(p, r), bins)] += 1.0;
  }
  return H;
}

std::size_t samples_after(const PathEnsemble& ens, double burn_in) {
  std::size_t r0 = 0;
  while (r0 < ens.records() && ens.time(r0) < burn_in - 1e-12) ++r0;
  return (ens.records() - r0) * ens.n_paths();
}

template <class Hist>
OccupationReport occupation_report(std::size_t paths, const WeightSpectrum& w, std::size_t bins, const BootstrapPlan& boot,
                                   Hist hist) {
  check_bootstrap(boot);
  OccupationReport rep;
  rep.bins = bins;
  rep.mu = bin_probabilities(w, bins);
  rep.histogram = hist(nullptr);
  rep.tv = tv_distance(rep.histogram, rep.mu);
  rep.ks = ks_distance(rep.histogram, rep.mu);
  std::vector<double> null_tv, tv;
  for (std::size_t b = 0; b < boot.resamples; ++b) {
    const auto pick = resample(paths, boot, b);
    const auto hb = hist(&pick);
    null_tv.push_back(tv_distance(hb, rep.histogram));
    tv.push_back(tv_distance(hb, rep.mu));
  }
  const MeanSd n = mean_sd(null_tv);
  rep.tv_null_mean = n.mean;
  rep.tv_null_se = n.sd;
  rep.tv_se = mean_sd(tv).sd;
  return rep;
}

}  // namespace

OccupationReport occupation_vs_mu(const PathEnsemble& ens, const WeightSpectrum& w, double burn_in, std::size_t bins,
                                  const BootstrapPlan& boot) {
  const PathHistograms H = occupation_counts(ens, burn_in, bins);
  OccupationReport rep = occupation_report(ens.n_paths(), w, bins, boot,
                                           [&](const std::vector<std::size_t>* pick) { return H.histogram(pick); });
  rep.samples = samples_after(ens, burn_in);
  return rep;
}

OccupationReport occupation_extrapolated(const PathEnsemble& coarse, const PathEnsemble& fine, const WeightSpectrum& w,
                                         double burn_in, std::size_t bins, const BootstrapPlan& boot) {
  if (coarse.n_paths() != fine.n_paths()) throw ParameterError("extrapolation needs equal path counts");
  const PathHistograms Hc = occupation_counts(coarse, burn_in, bins);
  const PathHistograms Hf = occupation_counts(fine, burn_in, bins);
  OccupationReport rep = occupation_report(coarse.n_paths(), w, bins, boot, [&](const std::vector<std::size_t>* pick) {
    auto hc = Hc.histogram(pick);
    auto hf = Hf.histogram(pick);
    for (std::size_t b = 0; b < hc.size(); ++b) hf[b] = 2.0 * hf[b] - hc[b];
    return hf;
  });
  rep.samples = samples_after(fine, burn_in);
  return rep;
}

// ---------------------------------------------------------------------------
// Mixing

std::vector<double> kernel_bin_probabilities(const SpectralDecomposition& dec, double x0, double t, std::size_t bins) {
  if (dec.ground_state) throw ParameterError("kernel bin probabilities need the Fourier basis");
  const int Kb = dec.basis_modes();
  const Eigen::VectorXd coef =
      semigroup_decay(dec, t).cwiseProduct(dec.coeffs.transpose() * basis_values_at(Kb, {x0}).row(0).transpose());
  std::vector<double> p(bins);
  const double h = two_pi / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const Eigen::VectorXd m = basis_arc_integrals(dec.weight, Kb, h * static_cast<double>(b), h * static_cast<double>(b + 1));
    p[b] = coef.dot(dec.coeffs.transpose() * m);
  }
  return p;
}

double MixingMC::max_abs_z() const {
  double z = 0.0;
  for (std::size_t i = 0; i < tv.size(); ++i)
    z = std::max(z, tv_se[i] > 0 ? std::abs(tv[i] - kernel_tv[i]) / tv_se[i] : 0.0);
  return z;
}

MixingMC mixing_rate_mc(const PathEnsemble& ens, const SpectralDecomposition& dec, const std::vector<double>& times,
                        std::size_t bins, const BootstrapPlan& boot) {
  check_bootstrap(boot);
  const std::vector<double> mu = bin_probabilities(dec.weight, bins);
  MixingMC out;
  out.times = times;
  std::vector<std::vector<std::size_t>> picks;
  for (std::size_t b = 0; b < boot.resamples; ++b) picks.push_back(resample(ens.n_paths(), boot, b));
  for (double t : times) {
    const std::size_t r = ens.record_of(t);
    PathHistograms H(ens.n_paths(), bins);
    for (std::size_t p = 0; p < ens.n_paths(); ++p) H.row(p)[bin_of(ens.at(p, r), bins)] = 1.0;
    const double obs = tv_distance(H.histogram(), mu);
    std::vector<double> reps;
    for (const auto& pick : picks) reps.push_back(tv_distance(H.histogram(&pick), mu));
    const MeanSd m = mean_sd(reps);
    out.tv.push_back(2.0 * obs - m.mean);
    out.tv_se.push_back(m.sd);
    out.kernel_tv.push_back(tv_distance(kernel_bin_probabilities(dec, ens.plan.x0, t, bins), mu));
  }
  std::vector<double> ft, fy;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (out.tv[i] > 0) {
      ft.push_back(times[i]);
      fy.push_back(out.tv[i]);
    }
  out.fit = fit_log_linear(ft, fy);
  return out;
}

// ---------------------------------------------------------------------------
// Hölder exponent

HolderFit holder_exponent(const PathEnsemble& ens, double h_min, double h_max, int lag_count) {
  const double unit = ens.plan.dt * static_cast<double>(ens.plan.stride);
  if (h_min <= 0) h_min = 4.0 * ens.plan.dt;
  if (h_max <= 0) h_max = ens.plan.T / 100.0;
  std::set<std::size_t> lags;
  for (double h : log_spaced(h_min, h_max, lag_count)) {
    const auto l = static_cast<std::size_t>(std::llround(h / unit));
    if (l >= 1 && l < ens.records()) lags.insert(l);
  }
  if (lags.size() < 3) throw SampleError("Hölder window too narrow: fewer than three distinct lags");
  HolderFit fit;
  std::vector<double> lx, ly;
  for (std::size_t l : lags) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t p = 0; p < ens.n_paths(); ++p)
      for (std::size_t r = 0; r + l < ens.records(); ++r) {
        const double d = ens.at(p, r + l) - ens.at(p, r);
        s += d * d;
        ++c;
      }
    fit.lags.push_back(static_cast<double>(l) * unit);
    fit.msd.push_back(s / static_cast<double>(c));
    lx.push_back(std::log(fit.lags.back()));
    ly.push_back(std::log(fit.msd.back()));
  }
  // Log-linear regression reused with log h as the abscissa.
  const MixingFit f = fit_log_linear(lx, fit.msd);
  fit.exponent = 0.5 * f.rate;
  fit.exponent_se = 0.5 * f.rate_se;
  return fit;
}

// ---------------------------------------------------------------------------
// Martingale problem

std::string to_string(Functional f) {
  switch (f) {
    case Functional::one: return "1";
    case Functional::sin_s: return "sin(X_s)";
    case Functional::cos_s: return "cos(X_s)";
    case Functional::half_circle_mid: return "1{X_{s/2} in [0,pi)}";
  }
  return "?";
}

std::vector<MartingaleTriple> default_triples() {
  return {{1.0 / 32, 1.0 / 16, Functional::one},
          {1.0 / 32, 1.0 / 16, Functional::sin_s},
          {1.0 / 16, 1.0 / 8, Functional::cos_s},
          {1.0 / 16, 1.0 / 8, Functional::half_circle_mid}};
}

double MartingaleReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& row : z)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

MartingaleReport martingale_test(const FourierField& xi_n, const std::vector<MartingaleProbe>& probes,
                                 const SimulationPlan& plan, const std::vector<MartingaleTriple>& triples,
                                 std::size_t table_points) {
  const double limit = stable_dt(xi_n);
  if (plan.dt > limit * (1.0 + 1e-12)) throw StabilityError("dt exceeds the stability bound");
  if (probes.empty() || triples.empty()) throw ParameterError("martingale test needs probes and triples");

  // Checkpoint steps: s/2, s, t of every triple.
  std::vector<std::size_t> checkpoints;
  auto step_of = [&](double t) { return t == 0.0 ? std::size_t{0} : step_count(t, plan.dt); };
  for (const auto& tr : triples) {
    if (!(tr.t > tr.s) || tr.s < 0) throw ParameterError("martingale triple needs 0 ≤ s < t");
    for (double t : {0.5 * tr.s, tr.s, tr.t}) checkpoints.push_back(step_of(t));
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const std::size_t C = checkpoints.size(), P = probes.size(), J = triples.size();
  auto slot = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), step_of(t)) - checkpoints.begin());
  };
  std::vector<std::array<std::size_t, 3>> slots;
  for (const auto& tr : triples) slots.push_back({slot(0.5 * tr.s), slot(tr.s), slot(tr.t)});

  std::vector<Tabulated> u, Lu;
  for (const auto& pr : probes) {
    u.emplace_back(pr.u, table_points, pr.slope);
    Lu.emplace_back(pr.Lu, table_points);
  }
  const Drift drift(xi_n);
  const double sdt = std::sqrt(plan.dt);
  const std::size_t last = checkpoints.back();

  // Per-path products (M_t - M_s)F, reduced in path order afterwards.
  std::vector<double> prod(plan.n_paths * P * J);
  parallel_for(plan.n_paths, plan.threads, [&](std::size_t path) {
    rng::SplitMix64 r(plan.master_seed, rng::Domain::path, path);
    std::vector<double> xs(C), I(C * P), integral(P, 0.0), lu_prev(P);
    double x = plan.x0;
    for (std::size_t p = 0; p < P; ++p) lu_prev[p] = Lu[p](x);
    std::size_t next = 0;
    auto record = [&](std::size_t k) {
      while (next < C && checkpoints[next] == k) {
        xs[next] = x;
        for (std::size_t p = 0; p < P; ++p) I[next * P + p] = integral[p];
        ++next;
      }
    };
    record(0);
    for (std::size_t k = 1; k <= last; ++k) {
      x += drift(x) * plan.dt + sdt * r.normal();
      for (std::size_t p = 0; p < P; ++p) {
        const double l = Lu[p](x);
        integral[p] += 0.5 * plan.dt * (lu_prev[p] + l);
        lu_prev[p] = l;
      }
      record(k);
    }
    double* out = prod.data() + path * P * J;
    for (std::size_t j = 0; j < J; ++j) {
      const auto [im, is, it] = slots[j];
      double F = 1.0;
      switch (triples[j].F) {
        case Functional::one: break;
        case Functional::sin_s: F = std::sin(xs[is]); break;
        case Functional::cos_s: F = std::cos(xs[is]); break;
        case Functional::half_circle_mid: F = wrap(xs[im]) < std::numbers::pi ? 1.0 : 0.0; break;
      }
      for (std::size_t p = 0; p < P; ++p) {
        const double dM = u[p](xs[it]) - u[p](xs[is]) - (I[it * P + p] - I[is * P + p]);
        out[p * J + j] = dM * F;
      }
    }
  });

  MartingaleReport rep;
  rep.triples = triples;
  rep.n_paths = plan.n_paths;
  for (const auto& pr : probes) rep.probes.push_back(pr.label);
  rep.mean.assign(P, std::vector<double>(J));
  rep.se = rep.z = rep.mean;
  const double N = static_cast<double>(plan.n_paths);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t j = 0; j < J; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < plan.n_paths; ++i) s += prod[(i * P + p) * J + j];
      const double m = s / N;
      double v = 0.0;
      for (std::size_t i = 0; i < plan.n_paths; ++i) v += std::pow(prod[(i * P + p) * J + j] - m, 2);
      const double se = std::sqrt(v / (N - 1.0) / N);
      rep.mean[p][j] = m;
      rep.se[p][j] = se;
      if (se > 0) {
        rep.z[p][j] = m / se;
      } else if (m == 0.0) {
        rep.z[p][j] = 0.0;
      } else {
        throw SampleError("martingale variance is degenerate for probe " + probes[p].label);
      }
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-dimensional distributions

double FddReport::z() const { return dof > 0 ? (chi2 - dof) / std::sqrt(2.0 * dof) : 0.0; }

FddReport fdd_check(const PathEnsemble& ens, const SpectralDecomposition& dec, const WeightedGalerkin& g,
                    const std::vector<double>& times, const std::vector<std::vector<Arc>>& partitions) {
  if (times.empty() || times.size() > 3 || partitions.size() != times.size())
    throw ParameterError("fdd check takes one to three times, each with a partition");
  for (const auto& part : partitions) {
    double L = 0.0;
    for (const auto& a : part) L += std::min(a.length, two_pi);
    if (part.empty() || std::abs(L - two_pi) > 1e-12) throw ParameterError("fdd sets must partition the circle");
  }
  FddReport rep;
  rep.times = times;
  std::vector<std::size_t> radix;
  std::size_t cells = 1;
  for (const auto& part : partitions) {
    radix.push_back(part.size());
    cells *= part.size();
  }
  std::vector<std::size_t> records;
  for (double t : times) records.push_back(ens.record_of(t));
  rep.observed.assign(cells, 0.0);
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double x = ens.at(p, records[i]);
      std::size_t a = 0;
      while (a + 1 < radix[i] && !partitions[i][a].contains(x)) ++a;
      idx = idx * radix[i] + a;
    }
    rep.observed[idx] += 1.0;
  }
  const double N = static_cast<double>(ens.n_paths());
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<Arc> sets(times.size());
    std::size_t rest = c;
    for (std::size_t i = times.size(); i-- > 0;) {
      sets[i] = partitions[i][rest % radix[i]];
      rest /= radix[i];
    }
    rep.cells.push_back(sets);
    const double e = N * fdd_probability(dec, g, ens.plan.x0, times, sets);
    if (e < 5.0) throw SampleError("fdd cell " + std::to_string(c) + " has expected count below 5");
    rep.expected.push_back(e);
    rep.chi2 += std::pow(rep.observed[c] - e, 2) / e;
  }
  rep.dof = static_cast<int>(cells) - 1;
  rep.p_value = rep.dof > 0 ? boost::math::gamma_q(0.5 * rep.dof, 0.5 * rep.chi2) : 1.0;
  return rep;
}

}  // namespace brox
