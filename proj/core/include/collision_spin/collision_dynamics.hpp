#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "collision_spin/linalg.hpp"
#include "collision_spin/mass_system.hpp"

namespace cspin {

// Zero-angular-momentum dynamics in the chart (r, s) with physical time t.
struct ReducedState {
  double r = 1.0;
  double rho = 0.0;
  CVector s;
  CVector omega;
  double t = 0.0;
};

struct ReducedDerivative {
  double r = 0.0;
  double rho = 0.0;
  CVector s;
  CVector omega;
};

// Blown-up variables v = sqrt(r) rho, w = r^{3/2} omega, d/dtau = r^{3/2} d/dt.
struct BlownUpState {
  double r = 0.0;
  double v = 0.0;
  CVector s;
  CVector w;
  double tau = 0.0;
};

struct BlownUpDerivative {
  double r = 0.0;
  double v = 0.0;
  CVector s;
  CVector w;
};

ReducedDerivative reduced_vector_field(const MassSystem& mass, const ReducedState& state);

/// 1/2 rho^2 + r^2 F(s, omega) / 2 - V(s) / r
double reduced_energy(const MassSystem& mass, const ReducedState& state);

/// The blown-up field. h does not enter the field itself, only the energy
/// relation 1/2 v^2 + 1/2 F - V = r h; it is accepted for symmetry with
/// blownup_energy_residual. r' = v r, so {r = 0} is invariant exactly.
BlownUpDerivative blownup_vector_field(const MassSystem& mass, const BlownUpState& state, double h);

/// 1/2 v^2 + 1/2 F(s, w) - V(s) - r h
double blownup_energy_residual(const MassSystem& mass, const BlownUpState& state, double h);

/// v on the energy surface: sign * sqrt(2 V(s) - F(s, w) + 2 r h).
double energy_consistent_v(const MassSystem& mass, double r, const CVector& s, const CVector& w,
                           double h, double sign = -1.0);

BlownUpState to_blownup(const ReducedState& state);
ReducedState to_reduced(const BlownUpState& state);

/// Distance-to-restpoint measures used for capture:
/// shape part ||w||_FS + |grad V(s)|, full part adds |v + sqrt(2 V(s))|.
double shape_capture_metric(const MassSystem& mass, const CVector& s, const CVector& w);
double capture_metric(const MassSystem& mass, const BlownUpState& state);

struct TrajectorySample {
  double time = 0.0;  // tau (blown-up) or t (reduced)
  double r = 0.0;
  double v = 0.0;     // v (blown-up) or rho (reduced)
  CVector s;
  CVector w;          // w (blown-up) or omega (reduced)
  double theta = 0.0;
  double arclength = 0.0;
  double energy_residual = 0.0;
  bool extrapolated = false;  // produced by the post-capture linearization
};

enum class Termination {
  completed,         // reached the requested end time
  captured,          // restpoint capture; tail filled in by linearization
  closest_approach,  // left the restpoint neighbourhood again; truncated at the closest point
  chart_exit,
  collision,
  user_stop,
};

std::string_view to_string(Termination t);

struct TrajectoryRecord {
  bool blown_up = true;
  double h = 0.0;
  std::vector<TrajectorySample> samples;
  double theta = 0.0;      // accumulated spin angle at the last sample
  double arclength = 0.0;  // accumulated Fubini-Study arclength at the last sample
  double energy_drift = 0.0;
  Termination termination = Termination::completed;
  std::string diagnostic;
  double shape_capture_time = std::numeric_limits<double>::quiet_NaN();
  double capture_time = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps = 0;
};

struct IntegrationControls {
  double t_end = 10.0;  // may be smaller than the initial time (backward run)
  double rtol = 1e-12;
  double atol = 1e-15;
  double sample_interval = 0.05;
  double capture_tol = 1e-10;
  double theta0 = 0.0;
  /// Stop once the capture metric has dropped below departure_floor and then
  /// grown by departure_factor over its running minimum.
  bool stop_on_departure = true;
  double departure_factor = 100.0;
  double departure_floor = 1e-3;
  double chart_limit = 1e6;
  /// Near-binary encounters in the blown-up flow need tiny steps; give up after this many.
  std::size_t max_steps = 2'000'000;
  /// Extrapolated samples after a full capture, up to t_end.
  bool extrapolate_after_capture = true;
  std::function<bool(const TrajectorySample&)> stop;
};

/// Integrates the blown-up equations augmented with theta' = -Omega(s,w)/||(s,1)||^2
/// and L' = ||w||_FS. In forward runs the shape block is frozen at (s, 0) once
/// its capture metric drops below capture_tol, and the run stops when the full
/// metric does; remaining samples follow the linearization of (r, v).
TrajectoryRecord integrate_blownup(const MassSystem& mass, const BlownUpState& initial, double h,
                                   const IntegrationControls& controls);

/// Integrates the reduced equations (physical time) with the same augmentation.
TrajectoryRecord integrate_reduced(const MassSystem& mass, const ReducedState& initial,
                                   const IntegrationControls& controls);

struct SpinOptions {
  double tail_fraction = 0.2;
  double convergence_tol = 1e-6;
  // Decay-rate fit uses samples with ||w||_FS in
  // [fit_low_factor * min, fit_high_factor * max].
  double fit_low_factor = 1e2;
  double fit_high_factor = 1e-1;
};

struct SpinReport {
  bool theta_converged = false;
  bool arclength_converged = false;
  bool divergence_flag = true;
  double theta_final = 0.0;       // last sample plus linearized tail estimate
  double arclength_final = 0.0;
  double theta_tail_estimate = 0.0;
  double arclength_tail_estimate = 0.0;
  std::vector<double> arclength_partials;
  double theta_tail_variation = 0.0;
  double arclength_tail_variation = 0.0;
  bool bound_holds = true;         // |dtheta| <= K_max dL on every sample interval
  double worst_bound_excess = 0.0; // max of |dtheta| - K_max dL
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  std::size_t fit_samples = 0;
  double cauchy_time = std::numeric_limits<double>::quiet_NaN();  // tau*
  double cauchy_sup = std::numeric_limits<double>::quiet_NaN();   // sup |theta(t2)-theta(t1)|, t1,t2 >= tau*
};

SpinReport spin_and_arclength(const TrajectoryRecord& record, const SpinOptions& options = {});

}  // namespace cspin
