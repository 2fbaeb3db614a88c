#pragma once

#include "collision_spin/linalg.hpp"

namespace cspin {

// Size/rotation/shape chart z = r e^{i theta} (s,1) / ||(s,1)||.
// All vectors are in mass-orthonormalized coordinates.

struct ShapePoint {
  double r = 1.0;
  double theta = 0.0;  // unwrapped
  CVector s;
};

struct ShapeVelocity {
  double rho = 0.0;
  double theta_dot = 0.0;
  CVector omega;
};

struct SaariSplit {
  CVector scaling;
  CVector rotation;
  CVector pure_shape;
};

/// Inverse chart. Throws ChartError when the last coordinate of z vanishes.
ShapePoint to_chart(const CVector& z);
CVector from_chart(const ShapePoint& p);

/// G(s, omega) = Re <<(s,1), (omega,0)>>
double chart_G(const CVector& s, const CVector& omega);
/// Omega(s, omega) = Im <<(s,1), (omega,0)>>
double chart_Omega(const CVector& s, const CVector& omega);

/// Squared Fubini-Study norm of the shape velocity omega at s.
double fs_norm_sq(const CVector& s, const CVector& omega);

/// Real matrix A(s) of the Fubini-Study metric, F(s, w) = w^T A(s) w, in the
/// interleaved layout, with a cached Cholesky factorization.
class FSMetric {
 public:
  explicit FSMetric(const CVector& s);

  const RMatrix& matrix() const noexcept { return a_; }
  const CVector& point() const noexcept { return s_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }

  double norm_sq(const RVector& w) const { return w.dot(a_ * w); }
  /// A^{-1} b
  RVector solve(const RVector& b) const { return llt_.solve(b); }
  /// DA(s)(delta): derivative of A in the direction delta.
  RMatrix directional_derivative(const RVector& delta) const;
  /// Gradient of s -> F(s, w) with w held fixed.
  RVector norm_sq_gradient(const RVector& w) const;
  /// A^{-1}(DA(s)(w) w - 1/2 grad_s F(s, w)); the velocity-quadratic part of
  /// the covariant derivative D_t w = w' + connection_term(w).
  RVector connection_term(const RVector& w) const;

 private:
  CVector s_;
  RVector sr_;
  RVector is_;
  double n2_;
  RMatrix a_;
  Eigen::LLT<RMatrix> llt_;
};

FSMetric fs_matrix(const CVector& s);

/// J(z, zeta) = Im <<z, zeta>>
double angular_momentum(const CVector& z, const CVector& zeta);

/// Mass-orthogonal split into the real spans of z and iz plus the remainder.
/// Throws PreconditionError for z = 0.
SaariSplit saari_decompose(const CVector& z, const CVector& v);

ShapeVelocity velocity_to_chart(const CVector& z, const CVector& zeta);
CVector velocity_from_chart(const ShapePoint& p, const ShapeVelocity& v);

/// Zero-angular-momentum spin rate, -Omega(s, omega) / ||(s,1)||^2.
double spin_rate(const CVector& s, const CVector& omega);

/// K(s) with |spin_rate(s, w)| <= K(s) ||w||_FS: the Fubini-Study operator
/// norm of the functional w -> -Omega(s, w) / ||(s,1)||^2.
double spin_bound_constant(const CVector& s);

}  // namespace cspin
