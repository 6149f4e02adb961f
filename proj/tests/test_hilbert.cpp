#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sqladder/errors.hpp"
#include "sqladder/hilbert.hpp"

using namespace sqladder;

TEST_CASE("destroy operator entries") {
  const auto a2 = make_destroy(FockSpace(2)).matrix();
  CHECK(a2(0, 1).real() == doctest::Approx(1.0));
  CHECK(std::abs(a2(0, 0)) == 0.0);
  CHECK(std::abs(a2(1, 0)) == 0.0);
  CHECK(std::abs(a2(1, 1)) == 0.0);

  const auto a4 = make_destroy(FockSpace(4)).matrix();
  CHECK(a4(2, 3).real() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  const CMatrix n = a4.adjoint() * a4;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(n(i, j) - (i == j ? Complex(i) : Complex(0))) < 1e-14);
    }
  }
}

TEST_CASE("Fock space rejects tiny dimensions") {
  CHECK_THROWS_AS(FockSpace(1), ValidationError);
  CHECK(FockSpace(160).guard_band() == 20);
  CHECK(FockSpace(160).interior() == 140);
}

TEST_CASE("squeeze operator against the dense exponential and analytic law") {
  const FockSpace space(80);
  const auto identity = make_squeeze(SqueezeParams(0.0, 0.0), space).matrix();
  CHECK(max_abs(identity - CMatrix::Identity(80, 80)) == 0.0);

  const auto s = make_squeeze(SqueezeParams(1.0, 0.0), space).matrix();
  CHECK(std::norm(s(0, 0)) == doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-9));
  CHECK(std::norm(s(0, 0)) == doctest::Approx(0.64805).epsilon(1e-5));
  CHECK(std::norm(s(2, 0)) == doctest::Approx(0.18793).epsilon(1e-4));
  CHECK(std::norm(s(1, 0)) < 1e-30);

  for (int k = 0; k < 40; ++k) {
    CHECK(std::abs(s(k, 0) - oracle::squeezed_vacuum_amplitude(1.0, 0.0, k)) < 1e-9);
  }

  const SqueezeParams zeta(0.7, 1.3);
  const auto s2 = make_squeeze(zeta, space).matrix();
  const auto ref = oracle::squeeze_expm(0.7, 1.3, 80);
  CHECK(max_abs_block(s2 - ref, 16) < 1e-9);
  CHECK(make_squeeze(zeta, space).unitarity_error() < 1e-9);
}

TEST_CASE("squeeze operator detects truncation") {
  CHECK_THROWS_AS(make_squeeze(SqueezeParams(2.0, 0.0), FockSpace(16)), TruncationError);
  CHECK_THROWS_AS(SqueezeParams(-0.1, 0.0), ValidationError);
}

TEST_CASE("squeeze phase is wrapped") {
  const SqueezeParams zeta(1.0, -std::numbers::pi / 2);
  CHECK(zeta.phi == doctest::Approx(1.5 * std::numbers::pi));
}

TEST_CASE("displacement follows the Poisson law") {
  const FockSpace space(60);
  CHECK(max_abs(make_displace(0.0, space).matrix() - CMatrix::Identity(60, 60)) == 0.0);
  const auto d = make_displace(1.0, space);
  for (int n = 0; n < 12; ++n) {
    CHECK(std::norm(d.matrix()(n, 0)) == doctest::Approx(oracle::poisson(1.0, n)).epsilon(1e-9));
  }
  CHECK(d.unitarity_error() < 1e-9);
}

TEST_CASE("engineered lowering operator") {
  const FockSpace space(80);
  const auto plain = engineered_lowering(SqueezeParams(), 0.0, space);
  CHECK(max_abs(plain.K.matrix() - make_destroy(space).matrix()) == 0.0);

  const auto eng = engineered_lowering(SqueezeParams(1.0, 0.0), 0.0, space);
  CHECK(eng.params.mu.real() == doctest::Approx(1.5430806348));
  CHECK(std::abs(eng.params.nu) == doctest::Approx(1.1752011936));

  // K = S a S+ holds only on a small corner once S is truncated.
  const FockSpace wide(kDefaultDim);
  const auto s = make_squeeze(SqueezeParams(1.0, 0.0), wide).matrix();
  const CMatrix conj = s * make_destroy(wide).matrix() * s.adjoint();
  const auto wide_k = engineered_lowering(SqueezeParams(1.0, 0.0), 0.0, wide).K.matrix();
  CHECK(max_abs_block(conj - wide_k, 8) < 1e-8);

  for (double r : {0.3, 0.7, 1.0}) {
    const auto k = engineered_lowering(SqueezeParams(r, 0.4), 0.0, wide).K.matrix();
    const auto vac = squeezed_fock_state(SqueezeParams(r, 0.4), 0, wide).amplitudes();
    const CVector kv = k * vac;
    CHECK(kv.squaredNorm() < 1e-12);
  }
}

TEST_CASE("squeezed Fock states match the K+ ladder") {
  const FockSpace space(kDefaultDim);
  for (int n = 0; n <= 6; ++n) {
    const auto psi = squeezed_fock_state(SqueezeParams(1.0, 0.6), n, space).amplitudes();
    const auto ref = oracle::squeezed_fock(1.0, 0.6, n, kDefaultDim);
    // Equal up to a global phase.
    const Complex overlap = ref.dot(psi);
    CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto vac = squeezed_fock_state(SqueezeParams(1.0, 0.0), 0, space).populations();
  CHECK(vac[0] == doctest::Approx(0.64805).epsilon(1e-5));
  CHECK(vac[2] == doctest::Approx(0.18793).epsilon(1e-4));

  const auto three = squeezed_fock_state(SqueezeParams(0.0, 0.0), 3, FockSpace(10));
  CHECK(three.populations()[3] == doctest::Approx(1.0));
  CHECK_THROWS_AS(squeezed_fock_state(SqueezeParams(1.0, 0.0), 40, FockSpace(40)),
                  ValidationError);
  CHECK_THROWS_AS(squeezed_fock_state(SqueezeParams(1.0, 0.0), 30, FockSpace(60)),
                  TruncationError);
}

TEST_CASE("parity") {
  CHECK(parity(fock_state(0, FockSpace(8))) == doctest::Approx(1.0));
  const FockSpace space(kDefaultDim);
  CHECK(parity(squeezed_fock_state(SqueezeParams(1.0, 0.0), 1, space)) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(parity(squeezed_fock_state(SqueezeParams(1.0, 0.0), 3, space)) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  for (int n = 0; n < 4; ++n) {
    const double expected = n % 2 == 0 ? 1.0 : -1.0;
    CHECK(parity(squeezed_fock_state(SqueezeParams(1.0, 2.0), n, space)) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("quadrature variance") {
  const FockSpace space(kDefaultDim);
  const auto vac = fock_state(0, space);
  for (double angle : {0.0, 0.4, 2.0}) {
    CHECK(quadrature_variance(vac, angle) == doctest::Approx(0.25));
  }
  const SqueezeParams zeta(1.0, 0.0);
  const auto sq = squeezed_fock_state(zeta, 0, space);
  const double theta = squeezed_quadrature_angle(zeta);
  const double vmin = quadrature_variance(sq, theta);
  const double vmax = quadrature_variance(sq, theta + std::numbers::pi / 2);
  CHECK(std::abs(vmin - 0.25 * std::exp(-2.0)) < 1e-9);
  CHECK(std::abs(vmax - 0.25 * std::exp(2.0)) < 1e-8);
  CHECK(vmin * vmax == doctest::Approx(1.0 / 16.0).epsilon(1e-8));
  CHECK(variance_to_db(vmin) == doctest::Approx(-8.686).epsilon(1e-4));

  const SqueezeParams rotated(0.5, 1.1);
  const auto sq2 = squeezed_fock_state(rotated, 0, space);
  CHECK(std::abs(quadrature_variance(sq2, squeezed_quadrature_angle(rotated)) -
                 0.25 * std::exp(-1.0)) < 1e-9);
}

TEST_CASE("spin-oscillator state blocks") {
  const FockSpace space(6);
  const SpinOscState up(Spin::up, fock_state(2, space));
  CHECK(up.probability(Spin::up) == doctest::Approx(1.0));
  CHECK(up.probability(Spin::down) == doctest::Approx(0.0));
  CHECK(std::abs(up.amplitudes()[6 + 2]) == doctest::Approx(1.0));
  CHECK(up.populations()[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(SpinOscState(space, CVector::Zero(12)), ValidationError);
  CHECK_THROWS_AS(SpinOscState(space, CVector::Ones(5)), DimensionError);
}
