#include "collision_spin/spin_demo.hpp"

#include <cmath>

#include "collision_spin/errors.hpp"
#include "collision_spin/ode.hpp"
#include "collision_spin/shape_geometry.hpp"

namespace cspin {

ShapeCurve spiral_curve(double c, double t_end, double t0, int shape_dim) {
  if (!(c >= 0.0)) throw PreconditionError("spiral_curve: c must be nonnegative");
  if (!(t0 > 1.0)) throw PreconditionError("spiral_curve: t0 must exceed 1 (unit disc)");
  if (!(t_end > t0)) throw PreconditionError("spiral_curve: t_end must exceed t0");
  if (shape_dim < 1) throw DimensionError("spiral_curve: shape_dim must be positive");
  ShapeCurve curve;
  curve.description = "spiral c=" + std::to_string(c);
  curve.t_start = t0;
  curve.t_end = t_end;
  curve.spiral_rate = c;
  curve.s = [c, shape_dim](double t) {
    CVector s = CVector::Zero(shape_dim);
    s(0) = std::polar(1.0 / std::sqrt(t), c * t);
    return s;
  };
  curve.s_dot = [c, shape_dim](double t) {
    CVector v = CVector::Zero(shape_dim);
    v(0) = Complex(-0.5 / t, c) * std::polar(1.0 / std::sqrt(t), c * t);
    return v;
  };
  curve.closed_form = [c, t0](double t) { return -c * std::log((t + 1.0) / (t0 + 1.0)); };
  return curve;
}

ShapeCurve constant_curve(const CVector& s0, double t_start, double t_end) {
  ShapeCurve curve;
  curve.description = "constant";
  curve.t_start = t_start;
  curve.t_end = t_end;
  curve.s = [s0](double) { return s0; };
  curve.s_dot = [n = s0.size()](double) { return CVector::Zero(n).eval(); };
  curve.closed_form = [](double) { return 0.0; };
  return curve;
}

ShapeCurve radial_curve(double t_start, double t_end, int shape_dim) {
  if (!(t_start > 0.0)) throw PreconditionError("radial_curve: t_start must be positive");
  ShapeCurve curve;
  curve.description = "radial";
  curve.t_start = t_start;
  curve.t_end = t_end;
  curve.s = [shape_dim](double t) {
    CVector s = CVector::Zero(shape_dim);
    s(0) = 1.0 / std::sqrt(t);
    return s;
  };
  curve.s_dot = [shape_dim](double t) {
    CVector v = CVector::Zero(shape_dim);
    v(0) = -0.5 / (t * std::sqrt(t));
    return v;
  };
  curve.closed_form = [](double) { return 0.0; };
  return curve;
}

LiftResult horizontal_lift(const ShapeCurve& curve, double theta0, const LiftOptions& options) {
  if (!curve.s || !curve.s_dot) throw PreconditionError("horizontal_lift: incomplete curve");
  if (!(curve.t_end > curve.t_start)) throw PreconditionError("horizontal_lift: empty interval");
  if (options.log_spacing && !(curve.t_start > 0.0)) {
    throw PreconditionError("horizontal_lift: log spacing needs t_start > 0");
  }

  LiftResult res;
  res.theta0 = theta0;
  res.r0 = options.r0;
  res.has_closed_form = static_cast<bool>(curve.closed_form);

  auto rhs = [&curve](double t, const RVector&, RVector& dy) {
    const CVector s = curve.s(t);
    const CVector sd = curve.s_dot(t);
    dy.resize(2);
    dy(0) = spin_rate(s, sd);
    dy(1) = std::sqrt(std::max(0.0, fs_norm_sq(s, sd)));
  };

  const int n = std::max(options.samples, 2);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    grid[i] = options.log_spacing
                  ? curve.t_start * std::pow(curve.t_end / curve.t_start, u)
                  : curve.t_start + u * (curve.t_end - curve.t_start);
  }
  grid.front() = curve.t_start;
  grid.back() = curve.t_end;

  auto emit = [&](double t, const RVector& y) {
    LiftSample smp;
    smp.t = t;
    smp.s = curve.s(t);
    smp.s_dot = curve.s_dot(t);
    if (!smp.s.allFinite()) throw ChartError("horizontal_lift: curve left the chart");
    smp.theta = y(0);
    smp.shape_arclength = y(1);
    if (curve.closed_form) smp.closed_form = theta0 + curve.closed_form(t);

    const ShapePoint p{options.r0, smp.theta, smp.s};
    const ShapeVelocity v{0.0, spin_rate(smp.s, smp.s_dot), smp.s_dot};
    const CVector z = from_chart(p);
    const CVector zdot = velocity_from_chart(p, v);
    smp.J_residual = std::abs(angular_momentum(z, zdot));
    smp.rotation_norm = saari_decompose(z, zdot).rotation.norm();

    res.max_J_residual = std::max(res.max_J_residual, smp.J_residual);
    res.max_rotation_norm = std::max(res.max_rotation_norm, smp.rotation_norm);
    if (curve.closed_form) {
      const double err = std::abs(smp.theta - smp.closed_form);
      res.max_abs_err = std::max(res.max_abs_err, err);
      const double ref = std::abs(smp.closed_form - theta0);
      if (ref > 0.0) res.max_rel_err = std::max(res.max_rel_err, err / ref);
    }
    res.samples.push_back(std::move(smp));
  };

  ode::Options opts;
  opts.rtol = options.rtol;
  opts.atol = options.atol;
  ode::DormandPrince54 solver(rhs, opts);
  RVector y0(2);
  y0 << theta0, 0.0;
  solver.initialize(curve.t_start, y0, 1.0);
  emit(curve.t_start, y0);
  std::size_t next = 1;
  try {
    while (solver.t() < curve.t_end) {
      solver.step(curve.t_end);
      while (next < grid.size() && grid[next] <= solver.t()) {
        const double tg = grid[next++];
        emit(tg, tg == solver.t() ? solver.y() : solver.dense(tg));
      }
    }
  } catch (const IntegrationError& e) {
    throw IntegrationError(std::string("horizontal_lift: quadrature failed: ") + e.what());
  }

  const auto& first = res.samples.front();
  const auto& last = res.samples.back();
  res.diverged = std::abs(last.theta - theta0) > options.divergence_threshold &&
                 last.s_dot.norm() < first.s_dot.norm();
  return res;
}

SpinCertificate infinite_spin_certificate(const LiftResult& result, double spiral_rate,
                                          double threshold) {
  if (result.samples.size() < 3) throw PreconditionError("infinite_spin_certificate: too few samples");
  SpinCertificate cert;
  cert.expected_slope = -spiral_rate;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(result.samples.size());
  for (const auto& smp : result.samples) {
    const double x = std::log(smp.t + 1.0);
    sx += x;
    sy += smp.theta;
    sxx += x * x;
    sxy += x * smp.theta;
  }
  const double denom = cnt * sxx - sx * sx;
  if (!(denom > 0.0)) throw PreconditionError("infinite_spin_certificate: degenerate fit");
  cert.fit_slope = (cnt * sxy - sx * sy) / denom;
  cert.fit_intercept = (sy - cert.fit_slope * sx) / cnt;
  cert.slope_ok = spiral_rate > 0.0 ? std::abs(cert.fit_slope + spiral_rate) <= 0.01 * spiral_rate
                                    : std::abs(cert.fit_slope) <= 0.01;

  const double t0 = result.samples.front().t;
  const double theta_start = result.samples.front().theta;
  cert.worst_inequality_margin = -std::numeric_limits<double>::infinity();
  for (const auto& smp : result.samples) {
    // theta(t) - theta(t0) <= -1/2 int_{t0}^t r^2 psi' = -(c/2) ln(t/t0)
    const double margin = (smp.theta - theta_start) + 0.5 * spiral_rate * std::log(smp.t / t0);
    cert.worst_inequality_margin = std::max(cert.worst_inequality_margin, margin);
  }
  cert.inequality_holds = cert.worst_inequality_margin <= 1e-12;

  const auto& last = result.samples.back();
  cert.theta_excursion = std::abs(last.theta - result.theta0);
  cert.final_shape_arclength = last.shape_arclength;
  cert.diverges = spiral_rate > 0.0 && cert.slope_ok && cert.inequality_holds &&
                  cert.theta_excursion > threshold;
  return cert;
}

TrajectoryRecord lift_to_record(const LiftResult& result) {
  TrajectoryRecord rec;
  rec.blown_up = false;
  for (const auto& smp : result.samples) {
    TrajectorySample out;
    out.time = smp.t;
    out.r = result.r0;
    out.v = 0.0;
    out.s = smp.s;
    out.w = smp.s_dot;
    out.theta = smp.theta;
    out.arclength = smp.shape_arclength;
    rec.samples.push_back(std::move(out));
  }
  if (!rec.samples.empty()) {
    rec.theta = rec.samples.back().theta;
    rec.arclength = rec.samples.back().arclength;
  }
  return rec;
}

}  // namespace cspin
