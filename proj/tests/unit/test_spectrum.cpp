#include <doctest.h>

#include <cmath>

#include "brox/errors.hpp"
#include "brox/generator.hpp"
#include "brox/noise.hpp"
#include "brox/spectrum.hpp"

using namespace brox;

TEST_CASE("flat weight") {
  const PeriodicGrid g(256, 85);
  const WeightedGalerkin gal = assemble_weighted(FourierField(g), 8);
  for (int k = 1; k <= 8; ++k) {
    CHECK(gal.stiffness(2 * k - 1, 2 * k - 1) == doctest::Approx(0.5 * k * k * 2 * M_PI));
    CHECK(gal.stiffness(2 * k, 2 * k) == doctest::Approx(0.5 * k * k * 2 * M_PI));
  }
  CHECK((gal.stiffness - Eigen::MatrixXd(gal.stiffness.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-12);
  const SpectralDecomposition d = eigendecompose(gal);
  const double expect[] = {0.0, -0.5, -0.5, -2.0, -2.0, -4.5, -4.5};
  for (int i = 0; i < 7; ++i) CHECK(std::abs(d.eigenvalues[i] - expect[i]) <= 1e-10);

  const HeatKernel p = heat_kernel_eigen(eigendecompose(assemble_weighted(FourierField(g), 40)), 1.0, 128);
  double worst = 0;
  for (Eigen::Index i = 0; i < p.values.rows(); ++i)
    for (Eigen::Index j = 0; j < p.values.cols(); ++j)
      worst = std::max(worst, std::abs(p.values(i, j) - theta_kernel(1.0, torus_distance(p.x(i), p.y(j)))));
  CHECK(worst <= 1e-8);

  const InvariantMeasure im = invariant_measure(FourierField(g), 64);
  for (double v : im.density) CHECK(v == doctest::Approx(1.0 / (2 * M_PI)));
}

TEST_CASE("random environment spectrum") {
  const PeriodicGrid g(512, 170);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FourierField W = potential(sample_noise(seed, 16), 16, g);
    const WeightedGalerkin gal = assemble_weighted(W, 64);
    CHECK(gal.symmetry_defect() <= 1e-12);
    const SpectralDecomposition d = eigendecompose(gal, 16);
    CHECK(std::abs(d.eigenvalues[0]) <= 1e-9);
    CHECK(d.eigenvalues[1] < 0);
    CHECK(d.e1_constancy(256) <= 1e-8);
    CHECK(d.orthonormality_defect(gal, 40) <= 1e-9);
  }
}

TEST_CASE("similarity with the Fourier-Galerkin operator") {
  const PeriodicGrid g(256, 85);
  const FourierField xi = truncate(sample_noise(3, 8), 8, g);
  const SpectralDecomposition d = eigendecompose(assemble_weighted(potential_of(xi), 80));
  const Eigen::VectorXcd ev = galerkin_eigenvalues(xi);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(ev[i].imag()) <= 1e-7);
    CHECK(std::abs(ev[i].real() - d.eigenvalues[i]) <= 1e-7);
  }
}

TEST_CASE("kernel identities") {
  const PeriodicGrid g(512, 170);
  const FourierField W = potential(sample_noise(11, 16), 16, g);
  // δ(W) ≈ 7 here: the far-field kernel is ~1e-12 and needs K_b = 128 to be resolved
  const WeightedGalerkin gal = assemble_weighted(W, 128);
  const SpectralDecomposition d = eigendecompose(gal, 16);
  const std::size_t M = 512;
  const HeatKernel p1 = heat_kernel_eigen(d, 0.3, M);
  const HeatKernel p2 = heat_kernel_eigen(d, 0.5, M);
  const HeatKernel p3 = heat_kernel_eigen(d, 0.8, M);
  CHECK(p1.row_sum_defect() <= 1e-8);
  CHECK(p1.min_value() > 0);
  CHECK(chapman_kolmogorov_defect(p1, p2, p3) <= 1e-8);
  CHECK(detailed_balance_defect(p2, gal.weight) <= 1e-8);
  CHECK_THROWS_AS(heat_kernel_eigen(d, 0.0, M), ParameterError);

  // backward-Euler resolvent product converges at first order
  const Eigen::MatrixXd exact = semigroup_matrix(d, gal, 0.3);
  double prev = 0;
  for (int steps : {64, 128, 256}) {
    const double err = (resolvent_power_matrix(gal, 0.3, steps) - exact).norm();
    if (prev > 0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("invariant measure and mixing") {
  const PeriodicGrid g(512, 170);
  const FourierField xi = truncate(sample_noise(2, 16), 16, g);
  const InvariantMeasure im = invariant_measure(xi, 512);
  CHECK(im.adjoint_residual <= 1e-9);
  CHECK(im.stationarity <= 1e-9);
  const SpectralDecomposition d = eigendecompose(assemble_weighted(potential_of(xi), 64), 16);
  const double l2 = -d.eigenvalues[1];
  const MixingFit f = mixing_rate_kernel(d, log_spaced(1.0 / l2, 4.0 / l2, 8), 512);
  CHECK(std::abs(-f.rate - l2) / l2 <= 0.15);
}

TEST_CASE("flat mixing rate and gaussian fit") {
  const PeriodicGrid g(256, 85);
  const SpectralDecomposition d = eigendecompose(assemble_weighted(FourierField(g), 120));
  std::vector<double> ts;
  for (int i = 0; i < 8; ++i) ts.push_back(2.0 + i);
  const MixingFit f = mixing_rate_kernel(d, ts, 256);
  CHECK(std::abs(f.rate + 0.5) <= 0.025);

  std::vector<HeatKernel> ks;
  for (double t : log_spaced(0.005, 0.1, 4)) ks.push_back(heat_kernel_eigen(d, t, 512, {0, 64}));
  const GaussianFit fit = gaussian_bound_fit(ks);
  const GaussianFit flat = gaussian_bound_fit_flat(ks);
  CHECK(fit.finite());
  CHECK(std::abs(fit.c_lower / flat.c_lower - 1) <= 0.1);
  CHECK(std::abs(fit.c_upper / flat.c_upper - 1) <= 0.1);
}

TEST_CASE("ground-state basis") {
  const PeriodicGrid g(1024, 341);
  SUBCASE("flat weight reduces to the Fourier basis") {
    const WeightedGalerkin gal = assemble_ground_state(FourierField(g), 8);
    CHECK((gal.mass - 2 * M_PI * Eigen::MatrixXd::Identity(17, 17)).cwiseAbs().maxCoeff() == 0.0);
    const SpectralDecomposition d = eigendecompose(gal);
    const double expect[] = {0.0, -0.5, -0.5, -2.0, -2.0};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(d.eigenvalues[i] - expect[i]) <= 1e-12);
  }
  SUBCASE("same low spectrum as the weighted Fourier basis") {
    const FourierField W = potential(sample_noise(2, 16), 16, g);
    const int Kb = weight_coefficients(W).band();
    const SpectralDecomposition a = eigendecompose(assemble_weighted(W, Kb), 16);
    const SpectralDecomposition b = eigendecompose(assemble_ground_state(W, Kb), 16);
    CHECK(std::abs(b.eigenvalues[0]) <= 1e-9);
    for (int i = 1; i < 6; ++i) CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <= 1e-8 * std::abs(a.eigenvalues[i]));
  }
  SUBCASE("kernel identities survive a deep well") {
    // osc W = 12.4: the weighted mass matrix has condition ~e^{25}.
    const FourierField W = potential(sample_noise(9, 16), 16, g);
    CHECK(delta_W(W) > 12.0);
    const WeightSpectrum w = weight_coefficients(W);
    const SpectralDecomposition d = eigendecompose(assemble_ground_state(W, w.band()), 16);
    std::size_t P = 512;
    while (P < 2 * static_cast<std::size_t>(w.band()) * 3 / 2 + 1) P *= 2;
    const HeatKernel p3 = heat_kernel_eigen(d, 0.3, P), p6 = heat_kernel_eigen(d, 0.6, P), p9 = heat_kernel_eigen(d, 0.9, P);
    for (const HeatKernel* p : {&p3, &p6, &p9}) {
      CHECK(p->min_value() > 0);
      CHECK(p->row_sum_defect() <= 1e-8);
      CHECK(detailed_balance_defect(*p, w) <= 1e-10);
      CHECK(p->noise.rows() == p->values.rows());
      CHECK((p->values.array() > -p->noise.array()).all());
    }
    CHECK(chapman_kolmogorov_defect(p3, p6, p9) <= 1e-9);
  }
  SUBCASE("Fourier-only routines refuse it") {
    const FourierField W = potential(sample_noise(1, 8), 8, g);
    const WeightedGalerkin gal = assemble_ground_state(W, 32);
    const SpectralDecomposition d = eigendecompose(gal, 8);
    CHECK_THROWS_AS(fdd_probability(d, gal, 0.0, {0.5}, {Arc{0.0, 1.0}}), ParameterError);
    CHECK_THROWS_AS(strong_feller_norm(d, gal, 0.1, std::vector<double>(64, 1.0), 64), ParameterError);
  }
}

TEST_CASE("mixing window") {
  const PeriodicGrid g(256, 85);
  const SpectralDecomposition flat = eigendecompose(assemble_weighted(FourierField(g), 8));
  // λ₂ = λ₃ for the flat torus: the window falls back to starting at 1/gap.
  const auto tf = mixing_window(flat);
  CHECK(tf.size() == 8);
  CHECK(tf.front() == doctest::Approx(2.0));
  CHECK(tf.back() == doctest::Approx(8.0));
  const SpectralDecomposition d = eigendecompose(assemble_weighted(potential(sample_noise(13, 16), 16, g), 128), 16);
  const auto t = mixing_window(d);
  const double sep = d.eigenvalues[1] - d.eigenvalues[2];
  CHECK(t.front() >= 2.0 / sep - 1e-9);
  CHECK(t.back() - t.front() == doctest::Approx(3.0 / d.gap));
}
