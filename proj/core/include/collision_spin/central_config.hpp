#pragma once

#include <vector>

#include "collision_spin/linalg.hpp"
#include "collision_spin/mass_system.hpp"

namespace cspin {

/// Eigenvalues (lambda_+, lambda_-) of the 2x2 block [[0, 1], [c, -v0/2]]
/// governing a Hessian eigendirection of a collision-manifold restpoint.
struct RestpointPair {
  Complex plus;
  Complex minus;
};

RestpointPair restpoint_spectrum(double v0, double c);

struct CentralConfig {
  CVector s0;
  double V0 = 0.0;
  double v0 = 0.0;                         // -sqrt(2 V0)
  std::vector<double> hessian_spectrum;    // eigenvalues of D grad~V(s0), ascending
  std::vector<RestpointPair> lambda_pairs; // one per Hessian eigenvalue
  bool degenerate = false;
  double residual = 0.0;                   // |grad V(s0)|
  int iterations = 0;
};

struct CCSolverOptions {
  double tol = 1e-12;
  int max_iterations = 200;
  double degenerate_rel_tol = 1e-8;
  double chart_limit = 1e8;
};

/// grad V (Euclidean, interleaved real layout).
RVector shape_gradient(const MassSystem& mass, const CVector& s);
/// Fubini-Study gradient A^{-1}(s) grad V(s).
RVector fs_gradient(const MassSystem& mass, const CVector& s);
/// D(grad~V)(s) = A^{-1} Hess V + D(A^{-1})[.] grad V, analytic.
RMatrix fs_hessian(const MassSystem& mass, const CVector& s);
/// Eigenvalues c_i of D grad~V at s, ascending. They are real: the matrix is
/// A^{-1} H with A symmetric positive definite when grad V(s) = 0.
std::vector<double> fs_hessian_spectrum(const MassSystem& mass, const CVector& s);

/// Stacked residual grad_i U(q) + lambda m_i q_i in position space.
CVector cc_residual_full(const MassSystem& mass, const CVector& q, double lambda);

/// Damped Newton on grad V = 0 with Armijo backtracking on 1/2 |grad V|^2,
/// falling back to Fubini-Study gradient descent on V when the Newton step is
/// unusable. Throws DivergenceError (with the residual trace) or ChartError.
CentralConfig find_cc(const MassSystem& mass, const CVector& s_init,
                      const CCSolverOptions& options = {});

/// Fills the spectrum fields of a solved central configuration.
void attach_spectrum(const MassSystem& mass, CentralConfig& cc, double degenerate_rel_tol);

struct Classification {
  bool nondegenerate = true;
  int morse_index = 0;          // number of negative c_i
  int near_zero_count = 0;      // |c_i| < tol * max |c_j|
  std::vector<Complex> restpoint_spectrum;  // v0 followed by lambda_+/- for each c_i
  bool nonreal_unstable = true; // every nonreal eigenvalue has Re > 0
  bool lambda_plus_positive = true;
  double position_residual = 0.0;  // cc_residual_full at the normalized configuration
};

Classification classify(const MassSystem& mass, const CentralConfig& cc,
                        double tol_degenerate = 1e-8);

struct MultistartOptions {
  int seed = 0;
  int starts = 64;
  double radius = 3.0;
  double dedup_tol = 1e-6;
  int threads = 1;
  CCSolverOptions solver;
};

/// Deterministic Halton starts in the chart ball |s| <= radius. The returned
/// catalog is sorted by V0 then by the coordinates of s0, and does not depend
/// on the thread count.
std::vector<CentralConfig> multistart_cc(const MassSystem& mass, const MultistartOptions& options);

/// Radical-inverse Halton points in [-radius, radius]^dim restricted to the ball.
std::vector<RVector> halton_ball_points(int dim, int count, double radius, int seed);

}  // namespace cspin
