#include <doctest.h>

#include <cmath>
#include <random>

#include "collision_spin/errors.hpp"
#include "collision_spin/mass_system.hpp"
#include "collision_spin/shape_geometry.hpp"
#include "oracles.hpp"

using namespace cspin;

namespace {

// Equilateral triangle with unit side, centred at the origin.
CVector equilateral() {
  CVector q(3);
  for (int k = 0; k < 3; ++k) q(k) = std::polar(1.0 / std::sqrt(3.0), 2.0 * M_PI * k / 3.0);
  return q;
}

}  // namespace

TEST_CASE("hermitian_mass in orthonormal coordinates") {
  std::mt19937_64 rng(11);
  CVector e1 = CVector::Zero(3);
  e1(0) = 1.0;
  CHECK(std::abs(hermitian_mass(e1, e1) - Complex(1.0, 0.0)) < 1e-15);

  const CVector z = oracle::random_cvector(3, rng);
  const Complex zz = hermitian_mass(z, Complex(0, 1) * z);
  CHECK(std::abs(zz.real()) < 1e-14);
  CHECK(zz.imag() == doctest::Approx(z.squaredNorm()).epsilon(1e-14));

  const CVector v = oracle::random_cvector(3, rng), w = oracle::random_cvector(3, rng);
  CHECK(std::abs(hermitian_mass(v, w) - std::conj(hermitian_mass(w, v))) < 1e-14);
  CHECK_THROWS_AS(hermitian_mass(v, CVector::Zero(2)), DimensionError);
}

TEST_CASE("orthonormalization makes the mass metric standard") {
  for (const auto& m : std::vector<std::vector<double>>{{1, 1, 1}, {1, 2, 3.5}, {0.3, 1, 4, 2}}) {
    const MassSystem mass(m);
    const RMatrix& c = mass.orthonormalizer();
    const RMatrix id = c.transpose() * mass.mass_matrix() * c;
    CHECK((id - RMatrix::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("positions have centre of mass zero and reproduce I") {
  std::mt19937_64 rng(5);
  const std::vector<double> m{1.0, 2.0, 3.5, 0.7};
  const MassSystem mass(m);
  for (int trial = 0; trial < 20; ++trial) {
    const CVector z = oracle::random_cvector(3, rng);
    const CVector q = mass.positions(z);
    Complex com = 0.0;
    for (int i = 0; i < 4; ++i) com += m[i] * q(i);
    CHECK(std::abs(com) < 1e-13);
    CHECK(mass.moment_of_inertia(z) == doctest::Approx(oracle::inertia(m, q)).epsilon(1e-12));
    CHECK(mass.potential(z) == doctest::Approx(oracle::potential(m, q)).epsilon(1e-12));
    CHECK((mass.reduce(q) - z).norm() < 1e-12 * z.norm());
  }
}

TEST_CASE("inertia and potential on known configurations") {
  const MassSystem mass({1, 1, 1});
  const CVector z = mass.reduce(equilateral());
  CHECK(mass.moment_of_inertia(z) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mass.potential(z) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(mass.total_energy(z, CVector::Zero(2)) == doctest::Approx(-3.0).epsilon(1e-14));

  CVector zeta = CVector::Zero(2);
  zeta(0) = std::sqrt(6.0);
  CHECK(std::abs(mass.total_energy(z, zeta)) < 1e-13);

  CVector e1 = CVector::Zero(2);
  e1(0) = 1.0;
  CHECK(mass.moment_of_inertia(e1) == doctest::Approx(1.0));

  const MassSystem two({1, 1});
  CVector q(2);
  q << -1.0, 1.0;
  CHECK(two.potential(two.reduce(q)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("homogeneity and rotation invariance") {
  std::mt19937_64 rng(3);
  const MassSystem mass({1, 2, 3});
  for (int trial = 0; trial < 10; ++trial) {
    const CVector z = oracle::random_cvector(2, rng);
    for (double lam : {0.5, 2.0, 10.0}) {
      CHECK(mass.potential(lam * z) * lam == doctest::Approx(mass.potential(z)).epsilon(1e-12));
      CHECK(mass.moment_of_inertia(lam * z) ==
            doctest::Approx(lam * lam * mass.moment_of_inertia(z)).epsilon(1e-12));
    }
    const double th = std::uniform_real_distribution<double>(0, 2 * M_PI)(rng);
    CHECK(mass.potential(std::polar(1.0, th) * z) == doctest::Approx(mass.potential(z)).epsilon(1e-12));
    const CVector zeta = oracle::random_cvector(2, rng);
    CHECK(mass.total_energy(std::polar(1.0, th) * z, std::polar(1.0, th) * zeta) ==
          doctest::Approx(mass.total_energy(z, zeta)).epsilon(1e-12));
  }
}

TEST_CASE("collision input is rejected with the offending pair") {
  const MassSystem mass({1, 1, 1});
  CVector q(3);
  q << -1.0, -1.0, 2.0;
  try {
    (void)mass.potential(mass.reduce(q));
    FAIL("expected a collision error");
  } catch (const CollisionError& e) {
    CHECK(e.pair() == std::pair<int, int>{0, 1});
  }
}

TEST_CASE("shape potential is scale and rotation invariant") {
  std::mt19937_64 rng(17);
  const MassSystem mass({1, 2, 3, 4});
  for (int trial = 0; trial < 10; ++trial) {
    const CVector s = oracle::random_cvector(2, rng);
    const CVector u = homogeneous(s);
    CHECK(mass.shape_potential(s) == doctest::Approx(u.norm() * mass.potential(u)).epsilon(1e-14));
    const CVector z = from_chart({0.7, 1.3, s});
    CHECK(mass.shape_potential(s) == doctest::Approx(0.7 * mass.potential(z)).epsilon(1e-12));
  }
}

TEST_CASE("equal-mass Lagrange and Euler shape values") {
  const MassSystem mass({1, 1, 1});
  const ShapePoint lagrange = to_chart(mass.reduce(equilateral()));
  CHECK(mass.shape_potential(lagrange.s) == doctest::Approx(3.0).epsilon(1e-14));

  CVector q(3);
  q << -1.0, 0.0, 1.0;
  const ShapePoint euler = to_chart(mass.reduce(q));
  CHECK(mass.shape_potential(euler.s) ==
        doctest::Approx(oracle::euler_value_equal_masses()).epsilon(1e-10));
}

TEST_CASE("analytic gradients and Hessians match finite differences") {
  std::mt19937_64 rng(23);
  const MassSystem mass({1, 2.5, 0.8, 1.7});
  for (int trial = 0; trial < 5; ++trial) {
    const CVector z = oracle::random_cvector(3, rng);
    const RVector zr = to_real(z);
    const auto U = [&](const RVector& x) { return mass.potential(to_complex(x)); };
    const RVector g = to_real(mass.potential_gradient(z));
    CHECK((g - oracle::fd_gradient(U, zr)).norm() < 1e-6 * g.norm());
    const RMatrix h = mass.potential_hessian(z);
    const RMatrix hfd = oracle::fd_jacobian(
        [&](const RVector& x) { return RVector(to_real(mass.potential_gradient(to_complex(x)))); }, zr);
    CHECK((h - hfd).norm() < 1e-6 * h.norm());

    const CVector s = oracle::random_cvector(2, rng);
    const RVector sr = to_real(s);
    const auto V = [&](const RVector& x) { return mass.shape_potential(to_complex(x)); };
    const RVector gv = to_real(mass.shape_potential_gradient(s));
    CHECK((gv - oracle::fd_gradient(V, sr)).norm() < 1e-6 * gv.norm());
    const RMatrix hv = mass.shape_potential_hessian(s);
    const RMatrix hvfd = oracle::fd_jacobian(
        [&](const RVector& x) { return RVector(to_real(mass.shape_potential_gradient(to_complex(x)))); },
        sr);
    CHECK((hv - hvfd).norm() < 1e-6 * hv.norm());
  }
}

TEST_CASE("mass system validation and JSON input") {
  CHECK_THROWS_AS(MassSystem({1.0}), ConfigError);
  CHECK_THROWS_AS(MassSystem({1.0, -1.0}), ConfigError);
  CHECK_THROWS_AS(MassSystem({1.0, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(MassSystem::from_json("{\"masses\": 3}"), ConfigError);
  CHECK_THROWS_AS(MassSystem::from_json("not json"), ConfigError);
  const MassSystem m = MassSystem::from_json(R"({"masses": [1, 2, 3]})");
  CHECK(m.body_count() == 3);
  CHECK(m.total_mass() == 6.0);
}
