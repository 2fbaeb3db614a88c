#include "collision_spin/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collision_spin/errors.hpp"

namespace cspin::ode {

namespace {

// Dormand & Prince (1980) coefficients; dense output weights from Hairer's DOPRI5.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller exponents (order 5 pair).
constexpr double kAlpha = 0.7 / 5.0;
constexpr double kBeta = 0.4 / 5.0;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;

}  // namespace

DormandPrince54::DormandPrince54(Rhs rhs, Options options) : rhs_(std::move(rhs)), opt_(options) {}

void DormandPrince54::initialize(double t0, const RVector& y0, double direction) {
  dir_ = direction >= 0.0 ? 1.0 : -1.0;
  t_ = t_prev_ = t0;
  y_ = y_prev_ = y0;
  f_.resize(y0.size());
  rhs_(t_, y_, f_);
  for (RVector* v : {&k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_}) v->resize(y0.size());
  rc1_ = rc2_ = rc3_ = rc4_ = rc5_ = RVector::Zero(y0.size());
  rc1_ = y0;
  h_ = opt_.h_init > 0.0 ? opt_.h_init : initial_step();
  err_prev_ = 1e-4;
  accepted_ = rejected_ = 0;
}

void DormandPrince54::reset_state(const RVector& y) {
  y_ = y;
  rhs_(t_, y_, f_);
}

double DormandPrince54::error_norm(const RVector& y_old, const RVector& y_new,
                                   const RVector& err) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_old(i)), std::abs(y_new(i)));
    const double q = err(i) / sc;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

double DormandPrince54::initial_step() const {
  // Hairer, Norsett & Wanner, Section II.4.
  auto scaled = [&](const RVector& v) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y_(i));
      sum += (v(i) / sc) * (v(i) / sc);
    }
    return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(1, v.size())));
  };
  const double d0 = scaled(y_);
  const double d1n = scaled(f_);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  RVector y1 = y_ + dir_ * h0 * f_;
  RVector f1(y_.size());
  rhs_(t_ + dir_ * h0, y1, f1);
  const double d2 = scaled(RVector(f1 - f_)) / h0;
  const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                               : std::pow(0.01 / std::max(d1n, d2), 0.2);
  double h = std::min(100.0 * h0, h1);
  if (opt_.h_max > 0.0) h = std::min(h, opt_.h_max);
  return h;
}

void DormandPrince54::step(double t_limit) {
  for (;;) {
    if (accepted_ + rejected_ >= opt_.max_steps) {
      throw IntegrationError("integrator exceeded the maximum number of steps");
    }
    const double remaining = dir_ * (t_limit - t_);
    if (remaining <= 0.0) return;
    double h = std::min(h_, remaining);
    if (opt_.h_max > 0.0) h = std::min(h, opt_.h_max);
    const bool last = h >= remaining;
    const double hmin = opt_.h_min * (std::abs(t_) + 1.0);
    if (h < hmin && !last) {
      throw IntegrationError("step size underflow at t = " + std::to_string(t_));
    }
    const double hs = dir_ * h;

    tmp_ = y_ + hs * a21 * f_;
    rhs_(t_ + c2 * hs, tmp_, k2_);
    tmp_ = y_ + hs * (a31 * f_ + a32 * k2_);
    rhs_(t_ + c3 * hs, tmp_, k3_);
    tmp_ = y_ + hs * (a41 * f_ + a42 * k2_ + a43 * k3_);
    rhs_(t_ + c4 * hs, tmp_, k4_);
    tmp_ = y_ + hs * (a51 * f_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t_ + c5 * hs, tmp_, k5_);
    tmp_ = y_ + hs * (a61 * f_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t_ + hs, tmp_, k6_);
    RVector y_new = y_ + hs * (a71 * f_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    const double t_new = last ? t_limit : t_ + hs;
    rhs_(t_new, y_new, k7_);

    const RVector err = hs * (e1 * f_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    double enorm = error_norm(y_, y_new, err);
    if (!std::isfinite(enorm) || !y_new.allFinite()) {
      // Non-finite trial: shrink hard and retry; give up below h_min.
      ++rejected_;
      h_ = h * kFacMin;
      if (h_ < hmin) throw IntegrationError("non-finite state at t = " + std::to_string(t_));
      continue;
    }

    if (enorm <= 1.0) {
      rc1_ = y_;
      rc2_ = y_new - y_;
      rc3_ = hs * f_ - rc2_;
      rc4_ = rc2_ - hs * k7_ - rc3_;
      rc5_ = hs * (d1 * f_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);

      enorm = std::max(enorm, 1e-10);
      double fac = kSafety * std::pow(enorm, -kAlpha) * std::pow(err_prev_, kBeta);
      fac = std::clamp(fac, kFacMin, kFacMax);
      err_prev_ = enorm;
      t_prev_ = t_;
      y_prev_ = y_;
      t_ = t_new;
      y_ = std::move(y_new);
      f_ = k7_;
      h_ = h * fac;
      ++accepted_;
      return;
    }
    ++rejected_;
    h_ = h * std::max(kFacMin, kSafety * std::pow(enorm, -kAlpha));
  }
}

RVector DormandPrince54::dense(double t) const {
  const double h = t_ - t_prev_;
  if (h == 0.0) return y_;
  const double s = (t - t_prev_) / h;
  const double s1 = 1.0 - s;
  return rc1_ + s * (rc2_ + s1 * (rc3_ + s * (rc4_ + s1 * rc5_)));
}

RVector integrate_to(const Rhs& rhs, double t0, const RVector& y0, double t1, const Options& options) {
  DormandPrince54 solver(rhs, options);
  solver.initialize(t0, y0, t1 >= t0 ? 1.0 : -1.0);
  while (solver.t() != t1) solver.step(t1);
  return solver.y();
}

}  // namespace cspin::ode
