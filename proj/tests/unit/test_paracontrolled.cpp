#include <doctest.h>

#include "brox/bony.hpp"
#include "brox/errors.hpp"
#include "brox/paracontrolled.hpp"
#include "oracles.hpp"

using namespace brox;

TEST_CASE("Bony decomposition") {
  const PeriodicGrid g(64, 16);
  const FourierField f = oracle::random_field(g, 21, 16);
  const FourierField h = oracle::random_field(g, 22, 16);
  CHECK(oracle::max_coeff(para(f, FourierField::constant(g, 2.0))) == 0.0);
  const FourierField sum = para(f, h) + resonant(f, h) + para(h, f);
  CHECK(oracle::max_coeff_diff(sum, product(f, h)) <= 1e-12 * 16);
  CHECK(oracle::max_coeff_diff(para(f, h), oracle::para(f, h)) <= 1e-12 * 16);
  CHECK(oracle::max_coeff_diff(resonant(f, h), oracle::resonant(f, h)) <= 1e-12 * 16);

  const PeriodicGrid big(1024, 341);
  const FourierField a = oracle::random_field(big, 1, 341, 1.0);
  const FourierField b = oracle::random_field(big, 2, 341, 1.0);
  CHECK(oracle::max_coeff_diff(para(a, b) + resonant(a, b) + para(b, a), product(a, b)) <= 1e-12 * 10);
}

TEST_CASE("intertwined paraproduct") {
  const PeriodicGrid g(1024, 341);
  const FourierField S = oracle::random_field(g, 5, 200, 0.5);
  const SourcedField X = SourcedField::from_source(S);
  CHECK(oracle::max_coeff(para_tilde(FourierField(g), X)) == 0.0);
  const FourierField a = oracle::random_field(g, 6, 100, 1.5);
  const FourierField pa = para(a, S);
  const FourierField id = 0.5 * laplacian(para_tilde(a, X)) + pa - heat_flow(pa, 1.0);
  CHECK(oracle::max_coeff(id) <= 1e-12 * std::max(1.0, oracle::max_coeff(pa)));
}

TEST_CASE("correctors against convolution oracle") {
  const PeriodicGrid g(64, 16);
  const FourierField a = oracle::random_field(g, 31, 6);
  const FourierField b = oracle::random_field(g, 32, 6);
  const SourcedField X = SourcedField::from_source(oracle::random_field(g, 33, 6));
  // P̃_a X via the oracle, then the literal definitions by convolution
  const FourierField pt = -2.0 * parametrix_inverse(oracle::para(a, X.source));
  const FourierField cn = oracle::resonant(gradient(pt), b) - oracle::product(a, oracle::resonant(gradient(X.value), b));
  CHECK(oracle::max_coeff_diff(corrector_Cnabla(a, X, b), cn) <= 1e-11);
  const FourierField cs = oracle::para(b, pt) - oracle::para(a, oracle::para(b, X.value));
  CHECK(oracle::max_coeff_diff(corrector_S(a, X, b), cs) <= 1e-11);
  CHECK(oracle::max_coeff(corrector_S(FourierField(g), X, b)) == 0.0);

  // constant a: P_c S drops blocks ≤ 0 of S, so P̃_c X = c X_{|k|>2} and the residual
  // -cΠ(∇X_{|k|≤2}, b) is supported in |k| ≤ 2 + 4
  const FourierField c = FourierField::constant(g, 1.7);
  const FourierField r = corrector_Cnabla(c, X, b);
  for (int k = 7; k <= 16; ++k) CHECK(std::abs(r.coeff(k)) <= 1e-12);
  CHECK(oracle::max_coeff_diff(r, -1.7 * oracle::resonant(gradient(X.value.low_pass(2)), b)) <= 1e-12);
}

TEST_CASE("Phi and Gamma") {
  const PeriodicGrid g(1024, 341);
  const EnhancedNoise Xi = enhance(sample_noise(4, 128), 128, 1.45, g);
  const int N = estimate_N_Xi(Xi);
  CHECK(N <= 128);
  const ParacontrolledMap map(Xi, N);

  const FourierField one = FourierField::constant(g, 1.0);
  CHECK(oracle::max_coeff_diff(map.phi(one), one) == 0.0);
  CHECK(oracle::max_coeff_diff(map.gamma(one).u, one) <= 1e-12);

  const ParacontrolledMap top(Xi, 128);
  const FourierField f = oracle::random_field(g, 8, 341, 2.0);
  CHECK(oracle::max_coeff_diff(top.phi(f), f) == 0.0);

  for (const auto& us : probe_fields(g, 5, 77, 3.0)) {
    const ParacontrolledFunction u = map.gamma(us);
    CHECK(u.iterations <= 60);
    CHECK(sobolev_norm(map.phi(u.u) - us, 0.0) <= 1e-10 * std::max(1.0, sobolev_norm(us, 0.0)));
    CHECK(sobolev_norm(map.gamma(map.phi(u.u)).u - u.u, 0.0) <= 1e-10 * std::max(1.0, sobolev_norm(us, 0.0)));
  }
  CHECK_THROWS_AS(ParacontrolledMap(Xi, 129), LevelError);
}

TEST_CASE("N_Xi threshold") {
  const PeriodicGrid g(512, 170);
  const EnhancedNoise e = enhance(sample_noise(3, 64), 64, 1.45, g);
  CHECK(estimate_N_Xi(enhance_field(0.0 * e.xi, 64, 1.45)) == 0);
  const int n1 = estimate_N_Xi(e);
  const int n2 = estimate_N_Xi(enhance_field(2.0 * e.xi, 64, 1.45));
  CHECK(n2 >= n1);
}
