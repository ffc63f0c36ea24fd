#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brox/diffusion.hpp"
#include "brox/errors.hpp"
#include "brox/generator.hpp"
#include "brox/paracontrolled.hpp"

using namespace brox;

namespace {

constexpr double pi = std::numbers::pi;

// Brute-force double integral of theta kernels over arc products (composite Simpson).
double theta_two_time(double x0, double t1, double t2, const Arc& A1, const Arc& A2, int nodes = 400) {
  auto simpson = [&](const Arc& A, auto f) {
    const double h = A.length / nodes;
    double s = f(A.start) + f(A.start + A.length);
    for (int i = 1; i < nodes; ++i) s += (i % 2 ? 4.0 : 2.0) * f(A.start + i * h);
    return s * h / 3.0;
  };
  return simpson(A1, [&](double y) {
    return theta_kernel(t1, torus_distance(x0, y)) *
           simpson(A2, [&](double z) { return theta_kernel(t2 - t1, torus_distance(y, z)); });
  });
}

}  // namespace

TEST_CASE("drift and tables evaluate the trigonometric sum") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(3, 12), 12, g);
  const Drift d(xi);
  CHECK(d.level() == 12);
  for (double x : {-7.3, 0.0, 0.4, 2.0, 5.9, 123.456}) CHECK(d(x) == doctest::Approx(xi.evaluate(x)).epsilon(1e-12));
  const Tabulated T(xi, 1 << 14, 0.5);
  for (double x : {-7.3, 0.0, 0.41, 2.0, 123.456})
    CHECK(std::abs(T(x) - xi.evaluate(x) - 0.5 * x) <= 1e-9 * (1.0 + d.sup_norm()));
  CHECK(stable_dt(xi) == doctest::Approx(0.1 / (1.0 + d.sup_norm() * d.sup_norm())));
  CHECK(stable_dt(FourierField(g)) == doctest::Approx(0.1));
}

TEST_CASE("simulation plan validation") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(3, 12), 12, g);
  SimulationPlan p;
  p.dt = 2.0 * stable_dt(xi);
  p.T = 100 * p.dt;
  CHECK_THROWS_AS(simulate_em(xi, p), StabilityError);
  p.dt = 0.01;
  p.T = 0.015;
  CHECK_THROWS_AS(simulate_em(FourierField(g), p), ParameterError);
  p.T = 0.1;
  p.stride = 3;
  CHECK_THROWS_AS(simulate_em(FourierField(g), p), ParameterError);
}

TEST_CASE("ensembles are reproducible and schedule independent") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(6, 8), 8, g);
  SimulationPlan p;
  p.dt = 1.0 / 1024;
  p.T = 0.25;
  p.n_paths = 37;
  p.master_seed = 99;
  p.stride = 4;
  const PathEnsemble a = simulate_em(xi, p);
  p.threads = 3;
  const PathEnsemble b = simulate_em(xi, p);
  CHECK(a.positions == b.positions);
  // A prefix of paths does not depend on the path count.
  p.n_paths = 5;
  const PathEnsemble c = simulate_em(xi, p);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t r = 0; r < c.records(); ++r) CHECK(c.at(i, r) == a.at(i, r));
  CHECK(a.records() == 65);
  CHECK(a.time(64) == doctest::Approx(0.25));
  for (double x : a.positions) CHECK(std::isfinite(x));
}

TEST_CASE("flat environment is Brownian motion") {
  const PeriodicGrid g(64, 21);
  SimulationPlan p;
  p.dt = 0.05;
  p.T = 2.0;
  p.n_paths = 10000;
  const PathEnsemble e = simulate_em(FourierField(g), p);
  const std::size_t R = e.records() - 1;
  double s = 0, s2 = 0, s4 = 0;
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    const double x = e.at(i, R);
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double N = static_cast<double>(e.n_paths());
  const double var = s2 / N;
  const double se = std::sqrt((s4 / N - var * var) / N);
  CHECK(std::abs(var - p.T) <= 3.0 * se);
  CHECK(std::abs(s / N) <= 3.0 * std::sqrt(p.T / N));
}

TEST_CASE("flat occupation is uniform") {
  const PeriodicGrid g(64, 21);
  SimulationPlan p;
  p.dt = 0.05;
  p.T = 60.0;
  p.n_paths = 1000;
  p.stride = 1;
  const PathEnsemble e = simulate_em(FourierField(g), p);
  const WeightSpectrum w = weight_coefficients(FourierField(g));
  const OccupationReport r = occupation_vs_mu(e, w, 10.05, 64, {50, 3});
  CHECK(r.samples == 1000000);
  for (double m : r.mu) CHECK(m == doctest::Approx(1.0 / 64).epsilon(1e-12));
  double mass = 0;
  for (double h : r.histogram) mass += h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.tv <= 0.02);
  CHECK(std::abs(r.z()) <= 4.0);
  CHECK_THROWS_AS(occupation_vs_mu(e, w, 100.0), SampleError);
}

TEST_CASE("bin probabilities are exact") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(4, 8), 8, g);
  const FourierField W = potential_of(xi);
  const WeightSpectrum w = weight_coefficients(W);
  const auto mu = bin_probabilities(w, 16);
  double total = 0;
  for (double m : mu) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  // Fine midpoint quadrature of e^{2W} over the first bin.
  const int q = 4000;
  double s = 0;
  for (int i = 0; i < q; ++i) s += std::exp(2.0 * W.evaluate((i + 0.5) * (2 * pi / 16) / q));
  CHECK(mu[0] == doctest::Approx(s * (2 * pi / 16) / q / w.mass()).epsilon(1e-8));
}

TEST_CASE("flat fdd matches theta-function products") {
  const PeriodicGrid g(64, 21);
  const FourierField zero(g);
  const WeightedGalerkin gal = assemble_weighted(zero, 40);
  const SpectralDecomposition d = eigendecompose(gal);
  const Arc full{0.0, 2 * pi}, upper{0.0, pi}, lower{pi, pi};
  CHECK(fdd_probability(d, gal, 0.3, {0.5}, {full}) == doctest::Approx(1.0).epsilon(1e-13));
  const double p = fdd_probability(d, gal, 0.3, {0.2, 0.7}, {upper, lower});
  CHECK(p == doctest::Approx(theta_two_time(0.3, 0.2, 0.7, upper, lower)).epsilon(1e-7));
  const Arc wrapped{5.5, 2.0};
  CHECK(wrapped.contains(0.1));
  CHECK_FALSE(wrapped.contains(2.0));
  CHECK(fdd_probability(d, gal, 6.0, {0.3}, {wrapped}) ==
        doctest::Approx(theta_two_time(6.0, 0.1, 0.3, full, wrapped)).epsilon(1e-7));

  SimulationPlan plan;
  plan.dt = 0.05;
  plan.T = 1.0;
  plan.n_paths = 20000;
  plan.x0 = 0.3;
  const PathEnsemble e = simulate_em(zero, plan);
  const FddReport r = fdd_check(e, d, gal, {0.2, 0.7}, {{upper, lower}, {upper, lower}});
  CHECK(r.dof == 3);
  CHECK(r.p_value > 0.001);
  CHECK(r.z() <= 3.0);
  CHECK(fdd_check(e, d, gal, {0.5}, {{full}}).observed[0] == 20000);
  CHECK_THROWS_AS(fdd_check(e, d, gal, {0.5}, {{upper}}), ParameterError);
}

TEST_CASE("flat Hölder exponent") {
  const PeriodicGrid g(64, 21);
  SimulationPlan p;
  p.dt = 1e-3;
  p.T = 4.0;
  p.n_paths = 1000;
  const HolderFit h = holder_exponent(simulate_em(FourierField(g), p));
  CHECK(h.exponent == doctest::Approx(0.5).epsilon(0.04));
  CHECK(h.lags.front() == doctest::Approx(4e-3));
  CHECK(h.lags.back() == doctest::Approx(0.04));
  p.T = 0.5;
  CHECK_THROWS_AS(holder_exponent(simulate_em(FourierField(g), p)), SampleError);
}

TEST_CASE("martingale test: constants and the flat coordinate") {
  const PeriodicGrid g(64, 21);
  const FourierField zero(g);
  SimulationPlan p;
  p.dt = 1.0 / 128;
  p.n_paths = 100000;
  std::vector<MartingaleProbe> probes{{"one", FourierField::constant(g, 1.0), zero, 0.0},
                                      {"x", zero, zero, 1.0},
                                      {"cos", FourierField::single_mode(g, 1, 0.5), FourierField::single_mode(g, 1, -0.25), 0.0}};
  const MartingaleReport r = martingale_test(zero, probes, p, default_triples());
  for (double z : r.z[0]) CHECK(z == 0.0);
  for (std::size_t p_ = 1; p_ < 3; ++p_)
    for (double z : r.z[p_]) CHECK(std::abs(z) <= 3.0);
  // A wrong generator is detected: claim 𝓛cos = 0.
  probes[2].Lu = zero;
  const MartingaleReport bad = martingale_test(zero, probes, p, {{0.0, 0.5, Functional::one}});
  CHECK(std::abs(bad.z[2][0]) > 10.0);
}

TEST_CASE("martingale test on a paracontrolled probe") {
  const PeriodicGrid g(256, 85);
  const auto noise = sample_noise(6, 64);
  const EnhancedNoise Xi = enhance(noise, 64, 1.2, g);
  const int N = estimate_N_Xi(Xi);
  REQUIRE(N < 64);
  const GeneratorHandle H(Xi, N);
  const auto u = H.gamma(FourierField::single_mode(g, 1, cplx(0.5, 0.25)));
  CHECK(sup_norm(u.u - u.u_sharp) > 1e-3);
  const FourierField Lu = apply_L_untruncated(u.u, Xi.xi);
  SimulationPlan p;
  p.dt = std::exp2(std::floor(std::log2(stable_dt(Xi.xi))));
  p.n_paths = 4000;
  const MartingaleReport r = martingale_test(Xi.xi, {{"g", u.u, Lu, 0.0}}, p, default_triples());
  CHECK(r.max_abs_z() <= 3.5);
}

TEST_CASE("kernel bin probabilities and MC mixing agree in a seeded environment") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(6, 8), 8, g);
  const WeightedGalerkin gal = assemble_weighted(potential_of(xi), 96);
  const SpectralDecomposition d = eigendecompose(gal, 8);
  const auto pb = kernel_bin_probabilities(d, 1.0, 0.7, 32);
  double s = 0;
  for (double x : pb) s += x;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));

  SimulationPlan p;
  p.dt = 1.0 / 512;
  p.T = 4.0;
  p.n_paths = 4000;
  p.stride = 128;
  p.x0 = 3.89;
  const PathEnsemble e = simulate_em(xi, p);
  const MixingMC m = mixing_rate_mc(e, d, {1.0, 2.0, 3.0, 4.0}, 16, {100, 1});
  CHECK(m.max_abs_z() <= 3.5);
}
