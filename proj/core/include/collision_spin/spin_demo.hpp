#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/linalg.hpp"

namespace cspin {

/// A prescribed curve t -> s(t) in the shape chart.
struct ShapeCurve {
  std::string description;
  double t_start = 0.0;
  double t_end = 1.0;
  std::function<CVector(double)> s;
  std::function<CVector(double)> s_dot;
  /// theta(t) - theta(t_start) of the horizontal lift, when known in closed form.
  std::function<double(double)> closed_form;
  double spiral_rate = 0.0;  // c for the spiral family, 0 otherwise
};

/// s(t) = (t^{-1/2} e^{ict}, 0, ..., 0) on [t0, t_end]; t0 > 1 keeps |s_1| < 1.
/// The lift angle is theta(t) - theta(t0) = -c ln((t+1)/(t0+1)).
ShapeCurve spiral_curve(double c, double t_end, double t0 = 1.0 + 1e-6, int shape_dim = 1);
ShapeCurve constant_curve(const CVector& s0, double t_start, double t_end);
/// s_1(t) = t^{-1/2} real, falling towards 0.
ShapeCurve radial_curve(double t_start, double t_end, int shape_dim = 1);

struct LiftSample {
  double t = 0.0;
  CVector s;
  CVector s_dot;
  double theta = 0.0;
  double closed_form = std::numeric_limits<double>::quiet_NaN();  // absolute, theta0 included
  double J_residual = 0.0;           // |J(z, z')| of the reconstructed configuration
  double rotation_norm = 0.0;        // norm of the Saari rotation component of z'
  double shape_arclength = 0.0;      // Fubini-Study arclength of s on [t_start, t]
};

struct LiftResult {
  std::vector<LiftSample> samples;
  double theta0 = 0.0;
  double r0 = 1.0;
  bool has_closed_form = false;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  double max_J_residual = 0.0;
  double max_rotation_norm = 0.0;
  bool diverged = false;  // |theta - theta0| passed the threshold while |s'| decreased
};

struct LiftOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  int samples = 400;
  bool log_spacing = true;
  double r0 = 1.0;
  double divergence_threshold = 5.0;
};

/// theta(t) by adaptive integration of theta' = -Omega(s, s')/||(s,1)||^2,
/// together with the shape arclength, and horizontality diagnostics on
/// z(t) = from_chart(r0, theta(t), s(t)).
LiftResult horizontal_lift(const ShapeCurve& curve, double theta0, const LiftOptions& options = {});

struct SpinCertificate {
  double fit_intercept = 0.0;
  double fit_slope = 0.0;         // b in theta ~ a + b ln(t+1)
  double expected_slope = 0.0;    // -c
  bool slope_ok = false;          // |b + c| <= 0.01 c  (|b| <= 0.01 when c = 0)
  bool inequality_holds = true;   // theta(t) - theta(t0) <= -(c/2) ln(t/t0)
  double worst_inequality_margin = 0.0;
  double theta_excursion = 0.0;   // |theta(t_end) - theta0|
  double final_shape_arclength = 0.0;
  bool diverges = false;
};

SpinCertificate infinite_spin_certificate(const LiftResult& result, double spiral_rate,
                                          double threshold);

/// The lift as a trajectory record (r = r0, v = 0, w = s') so that
/// spin_and_arclength can be applied to it.
TrajectoryRecord lift_to_record(const LiftResult& result);

}  // namespace cspin
