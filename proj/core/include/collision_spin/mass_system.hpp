#pragma once

#include <string_view>
#include <vector>

#include "collision_spin/linalg.hpp"

namespace cspin {

/// Masses of a planar n-body problem together with the linear algebra of the
/// translation-reduced configuration space.
///
/// Reduced configurations z live in C^{n-1} in coordinates where the
/// Hermitian mass metric is the standard one, <<v, w>> = sum conj(v_i) w_i.
/// They are obtained from relative positions x_i = q_i - q_n by the change
/// of basis x = C z with C = L^{-T}, where L L^T = M is the Cholesky
/// factorization of the relative-coordinate mass matrix M = P^T diag(m) P.
///
/// All member functions are const and the object is immutable after
/// construction, so instances may be shared freely across threads.
class MassSystem {
 public:
  explicit MassSystem(std::vector<double> masses);

  /// Parses {"masses": [m1, m2, ...]}.
  static MassSystem from_json(std::string_view document);

  int body_count() const noexcept { return static_cast<int>(masses_.size()); }
  int reduced_dim() const noexcept { return body_count() - 1; }
  int shape_dim() const noexcept { return body_count() - 2; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double total_mass() const noexcept { return total_mass_; }

  /// P: relative coordinates (q_i - q_n) -> center-of-mass-zero positions.
  const RMatrix& reduction() const noexcept { return reduction_; }
  /// M = P^T diag(m) P in relative coordinates.
  const RMatrix& mass_matrix() const noexcept { return mass_matrix_; }
  /// C with x = C z; satisfies C^T M C = I.
  const RMatrix& orthonormalizer() const noexcept { return orthonormalizer_; }
  /// Q = P C: orthonormalized reduced coordinates -> positions.
  const RMatrix& positions_map() const noexcept { return positions_map_; }

  CVector positions(const CVector& z) const;
  CVector velocities(const CVector& zeta) const { return positions(zeta); }
  /// Inverse of positions() on center-of-mass-zero configurations.
  CVector reduce(const CVector& q) const;

  double moment_of_inertia(const CVector& z) const;

  double potential(const CVector& z) const;
  /// Real gradient of U packed as a complex vector (dU/dx_k + i dU/dy_k).
  CVector potential_gradient(const CVector& z) const;
  /// Real Hessian of U in the interleaved 2(n-1) layout.
  RMatrix potential_hessian(const CVector& z) const;

  /// V(s) = ||(s,1)|| U(s,1): the potential on normalized shapes.
  double shape_potential(const CVector& s) const;
  CVector shape_potential_gradient(const CVector& s) const;
  RMatrix shape_potential_hessian(const CVector& s) const;

  double total_energy(const CVector& z, const CVector& zeta) const;

  /// Throws CollisionError if some r_ij < 1e-13 * (typical size of z).
  void check_collision(const CVector& z) const;

 private:
  struct PairTerm {
    int i;
    int j;
    double mm;
    RVector b;  // row of Q_i - Q_j: q_i - q_j = b . z
  };

  void check_dim(const CVector& z, Eigen::Index expected, const char* what) const;

  std::vector<double> masses_;
  double total_mass_ = 0.0;
  RMatrix reduction_;
  RMatrix mass_matrix_;
  RMatrix orthonormalizer_;
  RMatrix positions_map_;
  RMatrix reducer_;
  std::vector<PairTerm> pairs_;
};

/// <<v, w>> in orthonormalized coordinates. Throws DimensionError on size mismatch.
Complex hermitian_mass(const CVector& v, const CVector& w);

}  // namespace cspin
