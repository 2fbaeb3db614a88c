#pragma once

// Reference computations that do not go through the library's own formulas.

#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Fourth-order central differences.
RVector fd_gradient(const std::function<double(const RVector&)>& f, const RVector& x, double h = 1e-4);
RMatrix fd_jacobian(const std::function<RVector(const RVector&)>& f, const RVector& x, double h = 1e-4);
/// d/dt f(x + t d) at t = 0.
double fd_directional(const std::function<double(const RVector&)>& f, const RVector& x,
                      const RVector& d, double h = 1e-3);

/// Newtonian potential straight from positions.
double potential(const std::vector<double>& m, const CVector& q);
double inertia(const std::vector<double>& m, const CVector& q);
/// sum m_a q_a ^ v_a
double angular_momentum(const std::vector<double>& m, const CVector& q, const CVector& v);

/// Classical RK4 on the unreduced planar Newton equations.
struct Newton {
  CVector q;
  CVector v;
};
Newton newton_rk4(const std::vector<double>& m, Newton state, double t_end, int steps);

/// Equal masses on a line at 0, x, 1: minimum of U sqrt(I) over x in (0, 1)
/// by golden-section search. Returns the minimal value.
double euler_value_equal_masses();

/// Closed-form inverse of the Fubini-Study matrix in the interleaved layout,
/// ||(s,1)||^2 (I + s s^T + (is)(is)^T).
RMatrix fs_inverse(const CVector& s);

/// Random masses-centred configuration with zero momentum and zero angular momentum.
Newton random_zero_momentum(const std::vector<double>& m, std::mt19937_64& rng, double speed);
/// Three bodies near an equilateral triangle of circumradius 2 (far from collapse within t = 1), same momentum constraints.
Newton near_equilateral(const std::vector<double>& m, std::mt19937_64& rng, double jitter, double speed);

CVector random_cvector(int n, std::mt19937_64& rng, double scale = 1.0);

}  // namespace oracle
