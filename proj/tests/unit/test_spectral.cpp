#include <doctest.h>

#include <cmath>
#include <numbers>

#include "brox/errors.hpp"
#include "brox/spectral.hpp"
#include "oracles.hpp"

using namespace brox;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PeriodicGrid(100, 10), GridError);
  CHECK_THROWS_AS(PeriodicGrid(64, 22), GridError);
  CHECK_THROWS_AS(PeriodicGrid(64, 0), GridError);
  CHECK(PeriodicGrid::dealiased(1024).max_mode() == 341);
}

TEST_CASE("round trip values <-> coefficients") {
  const PeriodicGrid g(256, 85);
  const FourierField f = oracle::random_field(g, 7, 85);
  const FourierField h = FourierField::from_values(g, f.values());
  CHECK(oracle::max_coeff_diff(f, h) <= 1e-12 * oracle::max_coeff(f));
  const double x = 0.731;
  double direct = f.coeff(0).real();
  for (int k = 1; k <= 85; ++k) direct += 2.0 * (f.coeff(k) * std::polar(1.0, k * x)).real();
  CHECK(f.evaluate(x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("multipliers") {
  const PeriodicGrid g(64, 21);
  CHECK(oracle::max_coeff(laplacian(FourierField::constant(g, 1.0))) == 0.0);

  const FourierField c = FourierField::single_mode(g, 1, 0.5);  // cos x
  const auto d = gradient(c).values();
  for (std::size_t j = 0; j < g.points(); ++j) CHECK(d[j] == doctest::Approx(-std::sin(g.point(j))).epsilon(1e-13));

  const FourierField c3 = FourierField::single_mode(g, 3, 0.5);
  const FourierField h = apply_multiplier(c3, [](int k) { return symbol::heat(k, 0.1); });
  CHECK(h.coeff(3).real() == doctest::Approx(0.5 * std::exp(-0.9)).epsilon(1e-14));

  CHECK_THROWS_AS(apply_multiplier(c3, [](int k) { return cplx(0.0, 1.0 * (k >= 0)); }), SymmetryError);
}

TEST_CASE("parametrix") {
  const PeriodicGrid g(64, 21);
  const FourierField f = FourierField::single_mode(g, 1, 1.0);  // e^{ix} + e^{-ix}
  CHECK(parametrix_inverse(f).coeff(1).real() == doctest::Approx(-0.6321205588285577).epsilon(1e-14));

  const PeriodicGrid big(1024, 341);
  const FourierField r = oracle::random_field(big, 3, 341);
  const FourierField defect = laplacian(parametrix_inverse(r)) + heat_flow(r, 1.0) - r;
  CHECK(oracle::max_coeff(defect) <= 1e-13 * oracle::max_coeff(r));

  const FourierField twice = parametrix_inverse(parametrix_inverse(r));
  const FourierField composed = apply_multiplier(r, [](int k) {
    const double gk = symbol::parametrix(k);
    return cplx(gk * gk);
  });
  CHECK(oracle::max_coeff_diff(twice, composed) <= 1e-14 * oracle::max_coeff(r));
}

TEST_CASE("dealiased product equals truncated convolution") {
  const PeriodicGrid g(128, 32);
  const FourierField a = oracle::random_field(g, 11, 32);
  const FourierField b = oracle::random_field(g, 12, 32);
  CHECK(oracle::max_coeff_diff(product(a, b), oracle::product(a, b)) <= 1e-12 * 32);
}

TEST_CASE("Littlewood-Paley blocks") {
  const PeriodicGrid g(64, 21);
  const FourierField f = FourierField::single_mode(g, 5, 1.0);
  CHECK(oracle::max_coeff_diff(lp_block(f, 2), f) == 0.0);
  CHECK(oracle::max_coeff(lp_block(f, 1)) == 0.0);
  CHECK(lp_block_index(5) == 2);
  CHECK(lp_block_index(4) == 1);
  CHECK(lp_block_index(1) == -1);

  const PeriodicGrid big(1024, 341);
  const FourierField r = oracle::random_field(big, 5, 341);
  FourierField sum(big);
  const int last = static_cast<int>(std::ceil(std::log2(341.0)));
  for (int j = -1; j <= last; ++j) sum += lp_block(r, j);
  CHECK(oracle::max_coeff_diff(sum, r) == 0.0);

  // disjoint spectra of far-apart blocks: product support lies away from the low modes
  const auto s = oracle::convolve(oracle::block(oracle::spectrum(r), 5), oracle::block(oracle::spectrum(r), 2));
  for (auto [k, c] : s)
    if (std::abs(c) > 0) CHECK(std::abs(k) > 32 - 8);
}

TEST_CASE("Besov norms") {
  const PeriodicGrid g(256, 85);
  CHECK(besov_norm(FourierField(g), BesovSpec::holder(-0.5)) == 0.0);
  const FourierField c4 = FourierField::single_mode(g, 4, 0.5);  // cos 4x
  for (double beta : {-0.5, 0.0, 1.0, 1.5}) {
    const double b = besov_norm(c4, BesovSpec::sobolev(beta));
    CHECK(b == doctest::Approx(std::pow(2.0, 1.0 * beta) * std::sqrt(0.5)).epsilon(1e-12));
    // k = 4 lies in block 1 (2 < 4 ≤ 4): the two norms differ by ((1+k²)^{1/2}/2^j)^β
    const double direct = sobolev_norm(c4, beta);
    CHECK(direct / b == doctest::Approx(std::pow(std::sqrt(17.0) / 2.0, beta)).epsilon(1e-12));
  }
  CHECK(l2_norm(c4) == doctest::Approx(std::sqrt(0.5)));
  CHECK(sup_norm(c4) == doctest::Approx(1.0));
}
