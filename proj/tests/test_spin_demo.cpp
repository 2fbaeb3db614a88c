#include <doctest.h>

#include <cmath>

#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/errors.hpp"
#include "collision_spin/presets.hpp"
#include "collision_spin/shape_geometry.hpp"
#include "collision_spin/spin_demo.hpp"

using namespace cspin;

TEST_CASE("lifts of non-spiralling curves do not turn") {
  CVector s0(2);
  s0 << Complex(0.3, 0.2), Complex(-0.1, 0.4);
  const LiftResult c = horizontal_lift(constant_curve(s0, 1.0, 10.0), 0.7);
  for (const auto& smp : c.samples) CHECK(smp.theta == 0.7);
  CHECK(c.samples.back().shape_arclength == 0.0);

  const LiftResult r = horizontal_lift(radial_curve(2.0, 1e3, 2), -0.2);
  for (const auto& smp : r.samples) CHECK(smp.theta == -0.2);
  CHECK(r.max_J_residual < 1e-10);
  CHECK(r.max_rotation_norm < 1e-10);
  CHECK_FALSE(r.diverged);
}

TEST_CASE("spiral curve") {
  const ShapeCurve sp = spiral_curve(1.0, 1e4);
  CHECK(sp.t_start == 1.0 + 1e-6);
  CHECK(std::abs(sp.s(100.0)(0)) == doctest::Approx(0.1));
  CHECK(std::abs(sp.s(sp.t_start)(0)) < 1.0);
  CHECK(std::abs(spiral_curve(1.0, 10.0, 1.0 + 1e-6, 1).s(1.0)(0) - std::polar(1.0, 1.0)) < 1e-15);
  double prev = -1.0;
  for (double t = 2.0; t < 3.0; t += 0.1) {
    const double psi = std::arg(sp.s(t)(0) * std::polar(1.0, -2.0));
    CHECK(psi > prev);
    prev = psi;
  }
  CHECK(spiral_curve(1.0, 10.0, 1.0 + 1e-6, 3).s(5.0).size() == 3);
  CHECK_THROWS_AS(spiral_curve(-1.0, 10.0), PreconditionError);
  CHECK_THROWS_AS(spiral_curve(1.0, 10.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(spiral_curve(1.0, 0.5), PreconditionError);
}

TEST_CASE("spiral lift matches the closed form") {
  for (double c : {0.5, 1.0, 2.0}) {
    const double t0 = 1.0 + 1e-6, T = 1e4;
    LiftOptions opt;
    opt.divergence_threshold = 2.0;  // c = 0.5 only turns by 4.3 up to T
    const LiftResult res = horizontal_lift(spiral_curve(c, T), 0.0, opt);
    const double exact = -c * std::log((T + 1.0) / (t0 + 1.0));
    CHECK(std::abs(res.samples.back().theta / exact - 1.0) < 1e-6);
    CHECK(res.max_rel_err < 1e-6);
    CHECK(res.max_J_residual < 1e-10);
    CHECK(res.max_rotation_norm < 1e-10);
    CHECK(res.diverged);

    const SpinCertificate cert = infinite_spin_certificate(res, c, 2.0);
    CHECK(cert.slope_ok);
    CHECK(std::abs(cert.fit_slope + c) <= 0.01 * c);
    CHECK(cert.inequality_holds);
    CHECK(cert.diverges);
  }
  // Against -ln((T+1)/2), i.e. t0 = 1 instead of 1 + 1e-6.
  const LiftResult one = horizontal_lift(spiral_curve(1.0, 1e4), 0.0);
  CHECK(std::abs(one.samples.back().theta / -std::log(10001.0 / 2.0) - 1.0) < 1e-6);
}

TEST_CASE("tolerance halving") {
  const ShapeCurve sp = spiral_curve(1.0, 1e4);
  LiftOptions opt;
  const double a = horizontal_lift(sp, 0.0, opt).samples.back().theta;
  opt.rtol *= 0.5;
  opt.atol *= 0.5;
  const double b = horizontal_lift(sp, 0.0, opt).samples.back().theta;
  CHECK(std::abs(a - b) < 1e-8);
}

TEST_CASE("radial infall has no spin") {
  const LiftResult res = horizontal_lift(spiral_curve(0.0, 1e4), 0.0);
  const SpinCertificate cert = infinite_spin_certificate(res, 0.0, 5.0);
  CHECK(std::abs(cert.fit_slope) < 1e-10);
  CHECK(cert.slope_ok);
  CHECK_FALSE(cert.diverges);
  CHECK_FALSE(res.diverged);
}

TEST_CASE("spiral fed through the orbit accumulator") {
  const LiftResult res = horizontal_lift(spiral_preset(1.0, 1e4), 0.0);
  const TrajectoryRecord rec = lift_to_record(res);
  REQUIRE(rec.samples.size() == res.samples.size());
  CHECK(rec.theta == res.samples.back().theta);
  const SpinReport rep = spin_and_arclength(rec);
  CHECK_FALSE(rep.theta_converged);
  CHECK(rep.divergence_flag);
  CHECK(rep.bound_holds);

  // The shape curve itself has growing Fubini-Study length (about 2 sqrt t).
  const double L = res.samples.back().shape_arclength;
  CHECK(L == doctest::Approx(2.0 * std::sqrt(1e4)).epsilon(0.05));
}
