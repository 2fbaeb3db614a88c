#include "collision_spin/shape_geometry.hpp"

#include <cmath>

#include "collision_spin/errors.hpp"

namespace cspin {

namespace {

void require_same_size(const CVector& a, const CVector& b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace

ShapePoint to_chart(const CVector& z) {
  if (z.size() < 1) throw DimensionError("to_chart: empty configuration");
  const Complex last = z(z.size() - 1);
  const double r = z.norm();
  if (!(std::abs(last) > 0.0) || std::abs(last) <= 1e-300 * r) {
    throw ChartError("to_chart: last reduced coordinate is zero (chart boundary)");
  }
  ShapePoint p;
  p.r = r;
  p.theta = std::arg(last);
  p.s = z.head(z.size() - 1) / last;
  return p;
}

CVector from_chart(const ShapePoint& p) {
  const CVector u = homogeneous(p.s);
  return (p.r * std::polar(1.0, p.theta) / u.norm()) * u;
}

double chart_G(const CVector& s, const CVector& omega) {
  require_same_size(s, omega, "chart_G");
  return s.dot(omega).real();
}

double chart_Omega(const CVector& s, const CVector& omega) {
  require_same_size(s, omega, "chart_Omega");
  return s.dot(omega).imag();
}

double fs_norm_sq(const CVector& s, const CVector& omega) {
  require_same_size(s, omega, "fs_norm_sq");
  const double n2 = 1.0 + s.squaredNorm();
  const double cross = std::norm(s.dot(omega));
  return (n2 * omega.squaredNorm() - cross) / (n2 * n2);
}

FSMetric::FSMetric(const CVector& s)
    : s_(s), sr_(to_real(s)), is_(times_i(sr_)), n2_(1.0 + s.squaredNorm()) {
  const Eigen::Index m = sr_.size();
  a_ = RMatrix::Identity(m, m) / n2_ -
       (sr_ * sr_.transpose() + is_ * is_.transpose()) / (n2_ * n2_);
  llt_.compute(a_);
  if (llt_.info() != Eigen::Success) throw ChartError("Fubini-Study matrix not positive definite");
}

RMatrix FSMetric::directional_derivative(const RVector& delta) const {
  if (delta.size() != sr_.size()) throw DimensionError("directional_derivative: bad direction");
  const Eigen::Index m = sr_.size();
  const RVector idelta = times_i(delta);
  const double sd = sr_.dot(delta);
  const double n4 = n2_ * n2_;
  const RMatrix outer = sr_ * sr_.transpose() + is_ * is_.transpose();
  const RMatrix d_outer = delta * sr_.transpose() + sr_ * delta.transpose() +
                          idelta * is_.transpose() + is_ * idelta.transpose();
  return (-2.0 * sd / n4) * RMatrix::Identity(m, m) - d_outer / n4 +
         (4.0 * sd / (n4 * n2_)) * outer;
}

RVector FSMetric::norm_sq_gradient(const RVector& w) const {
  if (w.size() != sr_.size()) throw DimensionError("norm_sq_gradient: bad vector");
  const double g = sr_.dot(w);
  const double om = is_.dot(w);
  const double n4 = n2_ * n2_;
  return (-2.0 * w.squaredNorm() / n4) * sr_ - (2.0 / n4) * (g * w - om * times_i(w)) +
         (4.0 * (g * g + om * om) / (n4 * n2_)) * sr_;
}

RVector FSMetric::connection_term(const RVector& w) const {
  return solve(directional_derivative(w) * w - 0.5 * norm_sq_gradient(w));
}

FSMetric fs_matrix(const CVector& s) { return FSMetric(s); }

double angular_momentum(const CVector& z, const CVector& zeta) {
  require_same_size(z, zeta, "angular_momentum");
  return z.dot(zeta).imag();
}

SaariSplit saari_decompose(const CVector& z, const CVector& v) {
  require_same_size(z, v, "saari_decompose");
  const double inertia = z.squaredNorm();
  if (!(inertia > 0.0)) throw PreconditionError("saari_decompose: z must be nonzero");
  const Complex p = z.dot(v);
  SaariSplit out;
  out.scaling = (p.real() / inertia) * z;
  out.rotation = (p.imag() / inertia) * (Complex(0.0, 1.0) * z);
  out.pure_shape = v - out.scaling - out.rotation;
  return out;
}

ShapeVelocity velocity_to_chart(const CVector& z, const CVector& zeta) {
  require_same_size(z, zeta, "velocity_to_chart");
  const ShapePoint p = to_chart(z);
  const Eigen::Index last = z.size() - 1;
  const Complex zl = z(last);
  const Complex zetal = zeta(last);
  ShapeVelocity v;
  v.rho = z.dot(zeta).real() / p.r;
  v.theta_dot = (zetal / zl).imag();
  v.omega = (zeta.head(last) * zl - z.head(last) * zetal) / (zl * zl);
  return v;
}

CVector velocity_from_chart(const ShapePoint& p, const ShapeVelocity& v) {
  require_same_size(p.s, v.omega, "velocity_from_chart");
  const CVector u = homogeneous(p.s);
  const double n = u.norm();
  const double g = chart_G(p.s, v.omega);
  const Complex radial(v.rho / n - p.r * g / (n * n * n), v.theta_dot * p.r / n);
  return std::polar(1.0, p.theta) * (radial * u + (p.r / n) * pad_zero(v.omega));
}

double spin_rate(const CVector& s, const CVector& omega) {
  return -chart_Omega(s, omega) / (1.0 + s.squaredNorm());
}

double spin_bound_constant(const CVector& s) {
  if (s.size() == 0) return 0.0;
  const FSMetric metric(s);
  const RVector b = -times_i(to_real(s)) / (1.0 + s.squaredNorm());
  return std::sqrt(b.dot(metric.solve(b)));
}

}  // namespace cspin
