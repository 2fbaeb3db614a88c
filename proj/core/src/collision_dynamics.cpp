#include "collision_spin/collision_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "collision_spin/central_config.hpp"
#include "collision_spin/errors.hpp"
#include "collision_spin/ode.hpp"
#include "collision_spin/shape_geometry.hpp"

namespace cspin {

namespace {

void check_shape(const MassSystem& mass, const CVector& s, const CVector& w) {
  if (s.size() != mass.shape_dim() || w.size() != mass.shape_dim()) {
    throw DimensionError("state shape dimension does not match the mass system");
  }
}

double fs_speed(double f) { return std::sqrt(std::max(f, 0.0)); }

// Integrator state layout: [r, v|rho, s (2m), w (2m), theta, L].
struct Layout {
  Eigen::Index m;
  Eigen::Index s() const { return 2; }
  Eigen::Index w() const { return 2 + m; }
  Eigen::Index theta() const { return 2 + 2 * m; }
  Eigen::Index arclength() const { return 3 + 2 * m; }
  Eigen::Index size() const { return 4 + 2 * m; }
};

RVector pack(const Layout& lay, double r, double v, const CVector& s, const CVector& w,
             double theta, double arclength) {
  RVector y(lay.size());
  y(0) = r;
  y(1) = v;
  y.segment(lay.s(), lay.m) = to_real(s);
  y.segment(lay.w(), lay.m) = to_real(w);
  y(lay.theta()) = theta;
  y(lay.arclength()) = arclength;
  return y;
}

TrajectorySample unpack(const Layout& lay, double time, const RVector& y) {
  TrajectorySample out;
  out.time = time;
  out.r = y(0);
  out.v = y(1);
  out.s = to_complex(y.segment(lay.s(), lay.m));
  out.w = to_complex(y.segment(lay.w(), lay.m));
  out.theta = y(lay.theta());
  out.arclength = y(lay.arclength());
  return out;
}

struct Driver {
  const MassSystem& mass;
  const IntegrationControls& controls;
  Layout lay;
  bool blown_up;
  double h;
  bool frozen = false;
  double frozen_potential = 0.0;

  void rhs(const RVector& y, RVector& dy) const {
    const double r = y(0);
    const double v = y(1);
    dy.setZero();
    if (frozen) {
      dy(0) = v * r;
      dy(1) = 0.5 * v * v - frozen_potential;
      return;
    }
    const CVector s = to_complex(y.segment(lay.s(), lay.m));
    const RVector w = y.segment(lay.w(), lay.m);
    const CVector wc = to_complex(w);
    const FSMetric metric(s);
    const double potential = mass.shape_potential(s);
    const RVector fs_grad = metric.solve(to_real(mass.shape_potential_gradient(s)));
    const double f = metric.norm_sq(w);
    if (blown_up) {
      dy(0) = v * r;
      dy(1) = 0.5 * v * v + f - potential;
      dy.segment(lay.w(), lay.m) = fs_grad - 0.5 * v * w - metric.connection_term(w);
    } else {
      dy(0) = v;
      dy(1) = r * f - potential / (r * r);
      dy.segment(lay.w(), lay.m) =
          fs_grad / (r * r * r) - (2.0 * v / r) * w - metric.connection_term(w);
    }
    dy.segment(lay.s(), lay.m) = w;
    dy(lay.theta()) = spin_rate(s, wc);
    dy(lay.arclength()) = fs_speed(f);
  }

  double energy_residual(const TrajectorySample& smp) const {
    if (blown_up) {
      return blownup_energy_residual(mass, {smp.r, smp.v, smp.s, smp.w, smp.time}, h);
    }
    return reduced_energy(mass, {smp.r, smp.v, smp.s, smp.w, smp.time}) - h;
  }

  TrajectorySample sample(double time, const RVector& y) const {
    TrajectorySample smp = unpack(lay, time, y);
    smp.energy_residual = energy_residual(smp);
    return smp;
  }
};

TrajectoryRecord run(const MassSystem& mass, Driver& drv, double t0, const RVector& y0) {
  const IntegrationControls& ctl = drv.controls;
  TrajectoryRecord rec;
  rec.blown_up = drv.blown_up;
  rec.h = drv.h;

  const double dir = ctl.t_end >= t0 ? 1.0 : -1.0;
  const bool forward = dir > 0.0;
  const double dt = std::abs(ctl.sample_interval);
  if (!(dt > 0.0)) throw PreconditionError("sample_interval must be positive");

  ode::Options opts;
  opts.rtol = ctl.rtol;
  opts.atol = ctl.atol;
  opts.h_max = dt;
  opts.max_steps = ctl.max_steps;
  ode::DormandPrince54 solver([&drv](double, const RVector& y, RVector& dy) { drv.rhs(y, dy); },
                              opts);

  auto finish = [&](Termination t, std::string why) {
    rec.termination = t;
    rec.diagnostic = std::move(why);
  };

  try {
    solver.initialize(t0, y0, dir);
  } catch (const CollisionError& e) {
    throw PreconditionError(std::string("initial state on the collision set: ") + e.what());
  }
  rec.samples.push_back(drv.sample(t0, y0));

  std::size_t next_grid = 1;
  auto grid_time = [&](std::size_t k) { return t0 + dir * dt * static_cast<double>(k); };

  struct Closest {
    double metric = std::numeric_limits<double>::infinity();
    double time = 0.0;
    RVector y;
  } closest;
  const bool capture_enabled = drv.blown_up && forward;
  bool done = false;

  if (capture_enabled) {
    const TrajectorySample& s0 = rec.samples.front();
    if (shape_capture_metric(mass, s0.s, s0.w) < ctl.capture_tol) {
      RVector y = y0;
      y.segment(drv.lay.w(), drv.lay.m).setZero();
      drv.frozen = true;
      drv.frozen_potential = mass.shape_potential(s0.s);
      solver.reset_state(y);
      rec.shape_capture_time = t0;
    }
  }

  while (!done && solver.t() != ctl.t_end) {
    try {
      solver.step(ctl.t_end);
    } catch (const CollisionError& e) {
      finish(Termination::collision, e.what());
      break;
    } catch (const ChartError& e) {
      finish(Termination::chart_exit, e.what());
      break;
    }
    rec.steps = solver.accepted_steps();

    while (next_grid > 0 && dir * (grid_time(next_grid) - solver.t()) < 0.0) {
      const double tg = grid_time(next_grid++);
      rec.samples.push_back(drv.sample(tg, solver.dense(tg)));
      if (ctl.stop && ctl.stop(rec.samples.back())) {
        finish(Termination::user_stop, "user stop condition");
        done = true;
        break;
      }
    }
    if (done) break;

    RVector y = solver.y();
    const CVector s = to_complex(y.segment(drv.lay.s(), drv.lay.m));
    if (!std::isfinite(s.norm()) || s.norm() > ctl.chart_limit) {
      rec.samples.push_back(drv.sample(solver.t(), y));
      finish(Termination::chart_exit, "shape left the affine chart (|s| > chart limit)");
      break;
    }
    if (!capture_enabled) continue;

    const CVector w = to_complex(y.segment(drv.lay.w(), drv.lay.m));
    if (!drv.frozen && shape_capture_metric(mass, s, w) < ctl.capture_tol) {
      y.segment(drv.lay.w(), drv.lay.m).setZero();
      drv.frozen = true;
      drv.frozen_potential = mass.shape_potential(s);
      solver.reset_state(y);
      rec.shape_capture_time = solver.t();
    }
    const BlownUpState here{y(0), y(1), s, to_complex(y.segment(drv.lay.w(), drv.lay.m)),
                            solver.t()};
    const double metric = capture_metric(mass, here);
    if (drv.frozen && metric < ctl.capture_tol) {
      rec.capture_time = solver.t();
      if (rec.samples.back().time != solver.t()) rec.samples.push_back(drv.sample(solver.t(), y));
      finish(Termination::captured, "restpoint capture");
      if (ctl.extrapolate_after_capture) {
        const double v0 = -std::sqrt(2.0 * mass.shape_potential(s));
        const double dv = y(1) - v0;
        const double rc = y(0);
        for (;; ++next_grid) {
          const double tg = grid_time(next_grid);
          if (tg > ctl.t_end) break;
          const double elapsed = tg - solver.t();
          const double decay = std::exp(v0 * elapsed);
          RVector ye = y;
          ye(1) = v0 + dv * decay;
          ye(0) = rc * std::exp(v0 * elapsed + dv * (decay - 1.0) / v0);
          TrajectorySample smp = drv.sample(tg, ye);
          smp.extrapolated = true;
          rec.samples.push_back(std::move(smp));
        }
      }
      done = true;
      break;
    }
    if (ctl.stop_on_departure) {
      if (metric < closest.metric) {
        closest = {metric, solver.t(), y};
      } else if (closest.metric < ctl.departure_floor &&
                 metric > ctl.departure_factor * closest.metric) {
        while (!rec.samples.empty() && rec.samples.back().time > closest.time) rec.samples.pop_back();
        if (rec.samples.empty() || rec.samples.back().time != closest.time) {
          rec.samples.push_back(drv.sample(closest.time, closest.y));
        }
        finish(Termination::closest_approach,
               "orbit left the restpoint neighbourhood; truncated at closest approach");
        done = true;
      }
    }
  }

  if (!done && rec.termination == Termination::completed) {
    if (rec.samples.back().time != solver.t()) rec.samples.push_back(drv.sample(solver.t(), solver.y()));
  }
  rec.theta = rec.samples.back().theta;
  rec.arclength = rec.samples.back().arclength;
  for (const auto& smp : rec.samples) {
    rec.energy_drift = std::max(rec.energy_drift, std::abs(smp.energy_residual));
  }
  return rec;
}

}  // namespace

ReducedDerivative reduced_vector_field(const MassSystem& mass, const ReducedState& st) {
  check_shape(mass, st.s, st.omega);
  if (!(st.r > 0.0)) throw PreconditionError("reduced_vector_field: r must be positive");
  const FSMetric metric(st.s);
  const RVector w = to_real(st.omega);
  const double f = metric.norm_sq(w);
  const double potential = mass.shape_potential(st.s);
  const RVector fs_grad = metric.solve(to_real(mass.shape_potential_gradient(st.s)));
  ReducedDerivative d;
  d.r = st.rho;
  d.rho = st.r * f - potential / (st.r * st.r);
  d.s = st.omega;
  d.omega = to_complex(RVector(fs_grad / (st.r * st.r * st.r) - (2.0 * st.rho / st.r) * w -
                               metric.connection_term(w)));
  return d;
}

double reduced_energy(const MassSystem& mass, const ReducedState& st) {
  check_shape(mass, st.s, st.omega);
  return 0.5 * st.rho * st.rho + 0.5 * st.r * st.r * fs_norm_sq(st.s, st.omega) -
         mass.shape_potential(st.s) / st.r;
}

BlownUpDerivative blownup_vector_field(const MassSystem& mass, const BlownUpState& st, double) {
  check_shape(mass, st.s, st.w);
  const FSMetric metric(st.s);
  const RVector w = to_real(st.w);
  const double f = metric.norm_sq(w);
  const RVector fs_grad = metric.solve(to_real(mass.shape_potential_gradient(st.s)));
  BlownUpDerivative d;
  d.r = st.v * st.r;
  d.v = 0.5 * st.v * st.v + f - mass.shape_potential(st.s);
  d.s = st.w;
  d.w = to_complex(RVector(fs_grad - 0.5 * st.v * w - metric.connection_term(w)));
  return d;
}

double blownup_energy_residual(const MassSystem& mass, const BlownUpState& st, double h) {
  check_shape(mass, st.s, st.w);
  return 0.5 * st.v * st.v + 0.5 * fs_norm_sq(st.s, st.w) - mass.shape_potential(st.s) - st.r * h;
}

double energy_consistent_v(const MassSystem& mass, double r, const CVector& s, const CVector& w,
                           double h, double sign) {
  const double v2 = 2.0 * mass.shape_potential(s) - fs_norm_sq(s, w) + 2.0 * r * h;
  if (v2 < 0.0) throw PreconditionError("energy_consistent_v: state not on the energy surface");
  return (sign < 0.0 ? -1.0 : 1.0) * std::sqrt(v2);
}

BlownUpState to_blownup(const ReducedState& st) {
  const double r32 = st.r * std::sqrt(st.r);
  return {st.r, std::sqrt(st.r) * st.rho, st.s, r32 * st.omega, 0.0};
}

ReducedState to_reduced(const BlownUpState& st) {
  if (!(st.r > 0.0)) throw PreconditionError("to_reduced: r must be positive");
  const double r32 = st.r * std::sqrt(st.r);
  return {st.r, st.v / std::sqrt(st.r), st.s, st.w / r32, 0.0};
}

double shape_capture_metric(const MassSystem& mass, const CVector& s, const CVector& w) {
  return std::sqrt(std::max(fs_norm_sq(s, w), 0.0)) + mass.shape_potential_gradient(s).norm();
}

double capture_metric(const MassSystem& mass, const BlownUpState& st) {
  return shape_capture_metric(mass, st.s, st.w) +
         std::abs(st.v + std::sqrt(2.0 * mass.shape_potential(st.s)));
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::captured: return "captured";
    case Termination::closest_approach: return "closest_approach";
    case Termination::chart_exit: return "chart_exit";
    case Termination::collision: return "collision";
    case Termination::user_stop: return "user_stop";
  }
  return "unknown";
}

TrajectoryRecord integrate_blownup(const MassSystem& mass, const BlownUpState& initial, double h,
                                   const IntegrationControls& controls) {
  check_shape(mass, initial.s, initial.w);
  if (initial.r < 0.0) throw PreconditionError("integrate_blownup: r must be nonnegative");
  Driver drv{mass, controls, Layout{2 * mass.shape_dim()}, true, h};
  const RVector y0 = pack(drv.lay, initial.r, initial.v, initial.s, initial.w, controls.theta0, 0.0);
  return run(mass, drv, initial.tau, y0);
}

TrajectoryRecord integrate_reduced(const MassSystem& mass, const ReducedState& initial,
                                   const IntegrationControls& controls) {
  check_shape(mass, initial.s, initial.omega);
  if (!(initial.r > 0.0)) throw PreconditionError("integrate_reduced: r must be positive");
  Driver drv{mass, controls, Layout{2 * mass.shape_dim()}, false, reduced_energy(mass, initial)};
  const RVector y0 =
      pack(drv.lay, initial.r, initial.rho, initial.s, initial.omega, controls.theta0, 0.0);
  return run(mass, drv, initial.t, y0);
}

SpinReport spin_and_arclength(const TrajectoryRecord& record, const SpinOptions& options) {
  SpinReport rep;
  std::vector<const TrajectorySample*> live;
  for (const auto& smp : record.samples) {
    if (!smp.extrapolated) live.push_back(&smp);
  }
  for (const auto& smp : record.samples) rep.arclength_partials.push_back(smp.arclength);
  if (live.empty()) return rep;

  const auto& last = *live.back();
  const double t_first = live.front()->time;
  const double t_last = last.time;
  const double span = t_last - t_first;

  // Tail variation over the last tail_fraction of the recorded span.
  double th_min = last.theta, th_max = last.theta, l_min = last.arclength, l_max = last.arclength;
  for (const auto* smp : live) {
    if (smp->time < t_last - options.tail_fraction * span) continue;
    th_min = std::min(th_min, smp->theta);
    th_max = std::max(th_max, smp->theta);
    l_min = std::min(l_min, smp->arclength);
    l_max = std::max(l_max, smp->arclength);
  }
  rep.theta_tail_variation = th_max - th_min;
  rep.arclength_tail_variation = l_max - l_min;

  // |theta'| <= K(s) ||w||_FS pointwise, and K is 1-Lipschitz in s in the
  // orthonormalized chart, so K_max on a sample interval is bounded by the
  // larger endpoint value plus the Euclidean length of the chord.
  for (std::size_t i = 1; i < live.size(); ++i) {
    const auto& a = *live[i - 1];
    const auto& b = *live[i];
    const double k_max = std::max(spin_bound_constant(a.s), spin_bound_constant(b.s)) +
                         (b.s - a.s).norm();
    const double excess =
        std::abs(b.theta - a.theta) - k_max * std::abs(b.arclength - a.arclength) - 1e-12;
    rep.worst_bound_excess = std::max(rep.worst_bound_excess, excess);
  }
  rep.bound_holds = rep.worst_bound_excess <= 0.0;

  // Exponential decay fit of ||w||_FS, the arclength integrand.
  std::vector<double> speed(live.size());
  double sp_min = std::numeric_limits<double>::infinity();
  double sp_max = 0.0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    speed[i] = std::sqrt(std::max(0.0, fs_norm_sq(live[i]->s, live[i]->w)));
    if (speed[i] > 0.0) sp_min = std::min(sp_min, speed[i]);
    sp_max = std::max(sp_max, speed[i]);
  }
  if (sp_max > 0.0) {
    const double lo = options.fit_low_factor * sp_min;
    const double hi = options.fit_high_factor * sp_max;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (speed[i] < lo || speed[i] > hi) continue;
      const double x = live[i]->time;
      const double yv = std::log(speed[i]);
      sx += x;
      sy += yv;
      sxx += x * x;
      sxy += x * yv;
      ++cnt;
    }
    rep.fit_samples = cnt;
    if (cnt >= 3) {
      const double denom = cnt * sxx - sx * sx;
      if (denom > 0.0) rep.decay_rate = -(cnt * sxy - sx * sy) / denom;
    }
  }

  const double rate = rep.decay_rate;
  const double last_speed = speed.back();
  if (std::isfinite(rate) && rate > 0.0) {
    rep.arclength_tail_estimate = last_speed / rate;
    rep.theta_tail_estimate = spin_rate(last.s, last.w) / rate;
    // tau*: the linearized bound K ||w||_FS / rate on all remaining spin is below tol.
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (spin_bound_constant(live[i]->s) * speed[i] / rate < options.convergence_tol) {
        rep.cauchy_time = live[i]->time;
        double lo_th = live[i]->theta, hi_th = live[i]->theta;
        for (std::size_t j = i; j < live.size(); ++j) {
          lo_th = std::min(lo_th, live[j]->theta);
          hi_th = std::max(hi_th, live[j]->theta);
        }
        // Recorded variation plus the exponential-model bound on the unrecorded tail.
        rep.cauchy_sup = hi_th - lo_th + spin_bound_constant(last.s) * last_speed / rate;
        break;
      }
    }
  } else if (last_speed == 0.0) {
    rep.cauchy_time = t_last;
    rep.cauchy_sup = 0.0;
  }

  const bool captured = record.termination == Termination::captured;
  const bool cauchy_ok = std::isfinite(rep.cauchy_sup) && rep.cauchy_sup < options.convergence_tol;
  rep.theta_converged = captured || cauchy_ok || rep.theta_tail_variation < options.convergence_tol;
  rep.arclength_converged =
      captured || rep.arclength_tail_variation < options.convergence_tol ||
      (std::isfinite(rate) && rate > 0.0 && rep.arclength_tail_estimate < options.convergence_tol);
  rep.divergence_flag = !rep.theta_converged;
  rep.theta_final = last.theta + rep.theta_tail_estimate;
  rep.arclength_final = last.arclength + rep.arclength_tail_estimate;
  return rep;
}

}  // namespace cspin
