#include <doctest.h>

#include <cmath>
#include <random>

#include "collision_spin/central_config.hpp"
#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/errors.hpp"
#include "collision_spin/presets.hpp"
#include "collision_spin/shape_geometry.hpp"
#include "oracles.hpp"

using namespace cspin;

namespace {

// Reduced state <-> flat vector [r, rho, s, omega].
RVector flatten(const ReducedState& st) {
  const Eigen::Index m = 2 * st.s.size();
  RVector x(2 + 2 * m);
  x << st.r, st.rho, to_real(st.s), to_real(st.omega);
  return x;
}

ReducedState unflatten(const RVector& x, Eigen::Index m) {
  ReducedState st;
  st.r = x(0);
  st.rho = x(1);
  st.s = to_complex(x.segment(2, m));
  st.omega = to_complex(x.segment(2 + m, m));
  return st;
}

ReducedState random_state(std::mt19937_64& rng, int shape_dim) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  ReducedState st;
  st.r = u(rng);
  st.rho = u(rng) - 1.0;
  st.s = oracle::random_cvector(shape_dim, rng, 0.7);
  st.omega = oracle::random_cvector(shape_dim, rng, 0.5);
  return st;
}

// Christoffel form of the shape acceleration with the metric derivatives
// taken by finite differences of A.
RVector geodesic_acceleration(const MassSystem& mass, const ReducedState& st) {
  const RVector s = to_real(st.s);
  const RVector w = to_real(st.omega);
  const Eigen::Index m = s.size();
  const RMatrix a = FSMetric(st.s).matrix();
  std::vector<RMatrix> da(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    const double h = 1e-4;
    const RVector e = RVector::Unit(m, l);
    auto at = [&](double t) { return FSMetric(to_complex(RVector(s + t * e))).matrix(); };
    da[l] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  }
  // Gamma_{l,ij} w^i w^j = sum_ij (d_i A_lj - 1/2 d_l A_ij) w^i w^j
  RVector gw(m);
  for (Eigen::Index l = 0; l < m; ++l) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) acc += (da[i](l, j) - 0.5 * da[l](i, j)) * w(i) * w(j);
    }
    gw(l) = acc;
  }
  const RVector gradv = oracle::fd_gradient(
      [&](const RVector& x) { return mass.shape_potential(to_complex(x)); }, s);
  const double r = st.r;
  return a.ldlt().solve(gradv / (r * r * r) - gw) - 2.0 * st.rho * w / r;
}

}  // namespace

TEST_CASE("homothetic data is a fixed shape") {
  const CollisionPreset p = lagrange_homothetic();
  ReducedState st;
  st.r = 0.8;
  st.rho = -0.3;
  st.s = p.cc.s0;
  st.omega = CVector::Zero(1);
  const ReducedDerivative d = reduced_vector_field(p.mass, st);
  CHECK(d.s.norm() == 0.0);
  CHECK(d.omega.norm() < 1e-12);
}

TEST_CASE("reduced field: energy and covariant form") {
  std::mt19937_64 rng(5);
  for (const auto& masses : {std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3, 0.5}}) {
    const MassSystem mass(masses);
    const Eigen::Index m = 2 * mass.shape_dim();
    for (int trial = 0; trial < 10; ++trial) {
      const ReducedState st = random_state(rng, mass.shape_dim());
      const ReducedDerivative d = reduced_vector_field(mass, st);
      RVector dir(2 + 2 * m);
      dir << d.r, d.rho, to_real(d.s), to_real(d.omega);
      const double de = oracle::fd_directional(
          [&](const RVector& x) { return reduced_energy(mass, unflatten(x, m)); }, flatten(st), dir,
          1e-4);
      CHECK(std::abs(de) < 1e-10 * (1 + dir.norm()));

      CHECK(d.r == st.r * 0 + st.rho);
      CHECK((d.s - st.omega).norm() == 0.0);
      CHECK(d.rho == doctest::Approx(st.r * fs_norm_sq(st.s, st.omega) -
                                     mass.shape_potential(st.s) / (st.r * st.r)).epsilon(1e-13));
      const RVector cov = geodesic_acceleration(mass, st);
      CHECK((to_real(d.omega) - cov).norm() < 1e-8 * (1 + cov.norm()));
    }
  }
}

TEST_CASE("blown-up field") {
  const CollisionPreset p = lagrange_homothetic();
  BlownUpState rest;
  rest.r = 0.0;
  rest.v = p.cc.v0;
  rest.s = p.cc.s0;
  rest.w = CVector::Zero(1);
  const BlownUpDerivative d = blownup_vector_field(p.mass, rest, -1.0);
  CHECK(std::abs(d.r) == 0.0);
  CHECK(std::abs(d.v) < 1e-12);
  CHECK(d.s.norm() < 1e-12);
  CHECK(d.w.norm() < 1e-12);
  CHECK(std::abs(blownup_energy_residual(p.mass, rest, -1.0)) < 1e-12);

  std::mt19937_64 rng(15);
  for (const auto& masses : {std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3, 0.5}}) {
    const MassSystem mass(masses);
    for (int trial = 0; trial < 10; ++trial) {
      const ReducedState st = random_state(rng, mass.shape_dim());
      const ReducedDerivative rd = reduced_vector_field(mass, st);
      const BlownUpState b = to_blownup(st);
      const double r = st.r, r12 = std::sqrt(r), r32 = r * r12;
      CHECK(b.v == doctest::Approx(r12 * st.rho));
      CHECK((b.w - r32 * st.omega).norm() < 1e-14);
      const BlownUpDerivative bd = blownup_vector_field(mass, b, 0.0);
      CHECK(bd.r == doctest::Approx(r32 * rd.r));
      CHECK(bd.v == doctest::Approx(r32 * (st.rho * rd.r / (2 * r12) + r12 * rd.rho)).epsilon(1e-10));
      CHECK((bd.s - r32 * rd.s).norm() < 1e-12 * (1 + bd.s.norm()));
      const CVector w_dot = r32 * (1.5 * r12 * rd.r * st.omega + r32 * rd.omega);
      CHECK((bd.w - w_dot).norm() < 1e-8 * (1 + w_dot.norm()));

      const double h = reduced_energy(mass, st);
      CHECK(std::abs(blownup_energy_residual(mass, b, h)) < 1e-12 * (1 + std::abs(h)));
      const ReducedState back = to_reduced(b);
      CHECK(back.rho == doctest::Approx(st.rho));
      CHECK((back.omega - st.omega).norm() < 1e-12);

      BlownUpState on_c = b;
      on_c.r = 0.0;
      CHECK(blownup_vector_field(mass, on_c, h).r == 0.0);
    }
  }
  CHECK_THROWS_AS(energy_consistent_v(p.mass, 0.0, p.cc.s0, CVector::Constant(1, 100.0), 0.0),
                  PreconditionError);
}

TEST_CASE("reduced integration matches the unreduced Newton equations") {
  const std::vector<double> m{1.0, 1.0, 1.0};
  const MassSystem mass(m);
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 3; ++trial) {
    const oracle::Newton start = oracle::near_equilateral(m, rng, 0.15, 0.3);
    CHECK(std::abs(oracle::angular_momentum(m, start.q, start.v)) < 1e-13);
    const CVector z = mass.reduce(start.q);
    const CVector zeta = mass.reduce(start.v);
    const ShapePoint p = to_chart(z);
    const ShapeVelocity vel = velocity_to_chart(z, zeta);
    ReducedState st{p.r, vel.rho, p.s, vel.omega, 0.0};

    IntegrationControls ctl;
    ctl.t_end = 1.0;
    ctl.sample_interval = 0.25;
    ctl.theta0 = p.theta;
    const TrajectoryRecord rec = integrate_reduced(mass, st, ctl);
    REQUIRE(rec.termination == Termination::completed);
    CHECK(rec.energy_drift < 1e-9);

    for (const auto& smp : rec.samples) {
      const oracle::Newton nt = oracle::newton_rk4(m, start, smp.time, 4000);
      CHECK(std::abs(oracle::angular_momentum(m, nt.q, nt.v)) < 1e-10);
      const ShapePoint pq = to_chart(mass.reduce(nt.q));
      CHECK(std::abs(pq.r - smp.r) < 1e-6);
      CHECK((pq.s - smp.s).norm() < 1e-6);
      CHECK(std::abs(std::remainder(pq.theta - smp.theta, 2 * M_PI)) < 1e-6);
    }
  }
}

TEST_CASE("collision manifold is invariant") {
  const CollisionPreset p = lagrange_homothetic();
  BlownUpState st;
  st.r = 0.0;
  st.s = p.cc.s0 + CVector::Constant(1, Complex(1e-6, -2e-6));
  st.w = CVector::Constant(1, Complex(1e-6, 2e-6));
  st.v = energy_consistent_v(p.mass, 0.0, st.s, st.w, -1.0);
  IntegrationControls ctl;
  ctl.t_end = 3.0;
  ctl.capture_tol = 0.0;
  ctl.stop_on_departure = false;
  const TrajectoryRecord rec = integrate_blownup(p.mass, st, -1.0, ctl);
  double r_max = 0.0;
  for (const auto& smp : rec.samples) r_max = std::max(r_max, std::abs(smp.r));
  CHECK(r_max == 0.0);
  CHECK(rec.energy_drift < 1e-9);
  CHECK(rec.arclength > 0.0);
}

TEST_CASE("homothetic Lagrange orbit") {
  const CollisionPreset p = lagrange_homothetic();
  IntegrationControls ctl;
  ctl.t_end = 50.0;
  ctl.theta0 = 0.4;
  const TrajectoryRecord rec = integrate_blownup(p.mass, p.initial, p.h, ctl);
  CHECK(rec.energy_drift < 1e-9);
  CHECK(rec.termination == Termination::captured);
  std::vector<double> tau, lnr;
  for (const auto& smp : rec.samples) {
    CHECK((smp.s - p.cc.s0).norm() < 1e-12);
    CHECK(smp.w.norm() < 1e-12);
    CHECK(smp.theta == 0.4);
    CHECK(smp.arclength == 0.0);
    if (!smp.extrapolated && smp.time >= 5.0) {
      tau.push_back(smp.time);
      lnr.push_back(std::log(smp.r));
    }
  }
  REQUIRE(tau.size() > 10);
  const double slope = (lnr.back() - lnr.front()) / (tau.back() - tau.front());
  CHECK(std::abs(slope / p.cc.v0 - 1.0) < 0.01);
  CHECK(rec.samples.back().time == doctest::Approx(50.0));

  const SpinReport rep = spin_and_arclength(rec);
  CHECK(rep.theta_converged);
  CHECK(rep.arclength_converged);
  CHECK(rep.theta_final == 0.4);
  CHECK(rep.arclength_final == 0.0);
}

TEST_CASE("perturbed orbit into the Lagrange restpoint") {
  const CollisionPreset p = near_homothetic_perturbed();
  IntegrationControls ctl;
  ctl.t_end = 30.0;
  ctl.sample_interval = 0.02;
  const TrajectoryRecord rec = integrate_blownup(p.mass, p.initial, p.h, ctl);
  CHECK(rec.energy_drift < 1e-9);
  CHECK(rec.arclength > 0.0);
  const SpinReport rep = spin_and_arclength(rec);
  CHECK(rep.theta_converged);
  CHECK(rep.arclength_converged);
  CHECK_FALSE(rep.divergence_flag);
  CHECK(rep.bound_holds);
  CHECK(rep.cauchy_sup < 1e-6);
  CHECK(std::abs(rep.decay_rate / p.expected_decay_rate - 1.0) < 0.1);

  ctl.rtol *= 0.5;
  ctl.atol *= 0.5;
  const TrajectoryRecord fine = integrate_blownup(p.mass, p.initial, p.h, ctl);
  // Past tau* the two runs separate along the unstable direction like
  // exp(lambda_+ tau), so the quadrature is compared up to tau*.
  REQUIRE(std::isfinite(rep.cauchy_time));
  auto at = [](const TrajectoryRecord& r, double tau) {
    for (const auto& smp : r.samples) {
      if (smp.time >= tau - 1e-12) return smp;
    }
    return r.samples.back();
  };
  const TrajectorySample a = at(rec, rep.cauchy_time), b = at(fine, rep.cauchy_time);
  CHECK(a.time == b.time);
  CHECK(std::abs(a.arclength - b.arclength) < 1e-8);
  CHECK(std::abs(a.theta - b.theta) < 1e-8);
}

TEST_CASE("bad inputs") {
  const CollisionPreset p = lagrange_homothetic();
  ReducedState st;
  st.r = -1.0;
  st.s = p.cc.s0;
  st.omega = CVector::Zero(1);
  CHECK_THROWS_AS(integrate_reduced(p.mass, st, {}), PreconditionError);
  st.r = 1.0;
  st.s = CVector::Zero(2);
  CHECK_THROWS_AS(integrate_reduced(p.mass, st, {}), DimensionError);
  CHECK(to_string(Termination::captured) == "captured");
}
