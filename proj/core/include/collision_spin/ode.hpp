#pragma once

#include <cstddef>
#include <functional>

#include "collision_spin/linalg.hpp"

namespace cspin::ode {

using Rhs = std::function<void(double t, const RVector& y, RVector& dydt)>;

struct Options {
  double rtol = 1e-12;
  double atol = 1e-14;
  double h_init = 0.0;  // 0: automatic
  double h_max = 0.0;   // 0: unbounded
  double h_min = 1e-14; // relative to |t|+1; smaller steps raise IntegrationError
  std::size_t max_steps = 20'000'000;
};

/// Dormand-Prince 5(4) pair with PI step-size control and the standard
/// fourth-order continuous extension. Integrates forward or backward.
///
/// Usage: initialize(), then call step() repeatedly; after each accepted step
/// dense() interpolates anywhere in [t_prev(), t()].
class DormandPrince54 {
 public:
  DormandPrince54(Rhs rhs, Options options);

  void initialize(double t0, const RVector& y0, double direction = 1.0);

  /// Advances by one accepted step without passing t_limit. Throws
  /// IntegrationError on step-size underflow, non-finite state or too many steps.
  void step(double t_limit);

  /// Replaces the current state (e.g. after a projection); the FSAL
  /// derivative is recomputed.
  void reset_state(const RVector& y);

  double t() const noexcept { return t_; }
  double t_prev() const noexcept { return t_prev_; }
  const RVector& y() const noexcept { return y_; }
  const RVector& y_prev() const noexcept { return y_prev_; }
  double last_step() const noexcept { return t_ - t_prev_; }
  std::size_t accepted_steps() const noexcept { return accepted_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }

  RVector dense(double t) const;

 private:
  double error_norm(const RVector& y_old, const RVector& y_new, const RVector& err) const;
  double initial_step() const;

  Rhs rhs_;
  Options opt_;
  double dir_ = 1.0;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  RVector y_, y_prev_, f_;
  RVector k2_, k3_, k4_, k5_, k6_, k7_, tmp_;
  RVector rc1_, rc2_, rc3_, rc4_, rc5_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

/// Integrates from t0 to t1 and returns y(t1).
RVector integrate_to(const Rhs& rhs, double t0, const RVector& y0, double t1, const Options& options);

}  // namespace cspin::ode
