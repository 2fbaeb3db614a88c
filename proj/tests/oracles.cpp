#include "oracles.hpp"

#include <cmath>

namespace oracle {

RVector fd_gradient(const std::function<double(const RVector&)>& f, const RVector& x, double h) {
  RVector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g(i) = fd_directional(f, x, RVector::Unit(x.size(), i), h);
  }
  return g;
}

RMatrix fd_jacobian(const std::function<RVector(const RVector&)>& f, const RVector& x, double h) {
  const RVector f0 = f(x);
  RMatrix jac(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const RVector e = RVector::Unit(x.size(), i);
    jac.col(i) = (-f(x + 2 * h * e) + 8 * f(x + h * e) - 8 * f(x - h * e) + f(x - 2 * h * e)) / (12 * h);
  }
  return jac;
}

double fd_directional(const std::function<double(const RVector&)>& f, const RVector& x,
                      const RVector& d, double h) {
  return (-f(x + 2 * h * d) + 8 * f(x + h * d) - 8 * f(x - h * d) + f(x - 2 * h * d)) / (12 * h);
}

double potential(const std::vector<double>& m, const CVector& q) {
  double u = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) u += m[i] * m[j] / std::abs(q(i) - q(j));
  }
  return u;
}

double inertia(const std::vector<double>& m, const CVector& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m[i] * std::norm(q(i));
  return s;
}

double angular_momentum(const std::vector<double>& m, const CVector& q, const CVector& v) {
  double j = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    j += m[i] * (q(i).real() * v(i).imag() - q(i).imag() * v(i).real());
  }
  return j;
}

namespace {

CVector acceleration(const std::vector<double>& m, const CVector& q) {
  const auto n = static_cast<Eigen::Index>(m.size());
  CVector a = CVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Complex d = q(j) - q(i);
      const double r = std::abs(d);
      a(i) += m[j] * d / (r * r * r);
    }
  }
  return a;
}

}  // namespace

Newton newton_rk4(const std::vector<double>& m, Newton st, double t_end, int steps) {
  const double dt = t_end / steps;
  for (int k = 0; k < steps; ++k) {
    const CVector k1q = st.v;
    const CVector k1v = acceleration(m, st.q);
    const CVector k2q = st.v + 0.5 * dt * k1v;
    const CVector k2v = acceleration(m, st.q + 0.5 * dt * k1q);
    const CVector k3q = st.v + 0.5 * dt * k2v;
    const CVector k3v = acceleration(m, st.q + 0.5 * dt * k2q);
    const CVector k4q = st.v + dt * k3v;
    const CVector k4v = acceleration(m, st.q + dt * k3q);
    st.q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    st.v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return st;
}

double euler_value_equal_masses() {
  auto value = [](double x) {
    const std::vector<double> m{1.0, 1.0, 1.0};
    CVector q(3);
    q << 0.0, x, 1.0;
    const Complex com = (q(0) + q(1) + q(2)) / 3.0;
    for (int i = 0; i < 3; ++i) q(i) -= com;
    return potential(m, q) * std::sqrt(inertia(m, q));
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-3, b = 1.0 - 1e-3;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = value(c), fd = value(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = value(d);
    }
  }
  return value(0.5 * (a + b));
}

RMatrix fs_inverse(const CVector& s) {
  const Eigen::Index m = 2 * s.size();
  RVector sr(m), si(m);
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    sr(2 * k) = s(k).real();
    sr(2 * k + 1) = s(k).imag();
    si(2 * k) = -s(k).imag();
    si(2 * k + 1) = s(k).real();
  }
  const double n2 = 1.0 + s.squaredNorm();
  return n2 * (RMatrix::Identity(m, m) + sr * sr.transpose() + si * si.transpose());
}

Newton random_zero_momentum(const std::vector<double>& m, std::mt19937_64& rng, double speed) {
  const auto n = static_cast<Eigen::Index>(m.size());
  std::normal_distribution<double> g(0.0, 1.0);
  Newton st{CVector(n), CVector(n)};
  double mt = 0.0;
  for (double x : m) mt += x;
  for (;;) {
    Complex com = 0.0, mom = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      st.q(i) = Complex(g(rng), g(rng));
      st.v(i) = speed * Complex(g(rng), g(rng));
      com += m[i] * st.q(i);
      mom += m[i] * st.v(i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      st.q(i) -= com / mt;
      st.v(i) -= mom / mt;
    }
    double dmin = 1e300;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) dmin = std::min(dmin, std::abs(st.q(i) - st.q(j)));
    }
    if (dmin > 0.5) break;
  }
  // Remove the rigid rotation: v -> v - i w q with w = J / I.
  const double w = angular_momentum(m, st.q, st.v) / inertia(m, st.q);
  for (Eigen::Index i = 0; i < n; ++i) st.v(i) -= Complex(0.0, w) * st.q(i);
  return st;
}

Newton near_equilateral(const std::vector<double>& m, std::mt19937_64& rng, double jitter,
                        double speed) {
  std::normal_distribution<double> g(0.0, 1.0);
  Newton st{CVector(3), CVector(3)};
  Complex com = 0.0, mom = 0.0;
  double mt = 0.0;
  for (int i = 0; i < 3; ++i) {
    st.q(i) = std::polar(2.0, 2.0 * M_PI * i / 3.0) + jitter * Complex(g(rng), g(rng));
    st.v(i) = speed * Complex(g(rng), g(rng));
    com += m[i] * st.q(i);
    mom += m[i] * st.v(i);
    mt += m[i];
  }
  for (int i = 0; i < 3; ++i) {
    st.q(i) -= com / mt;
    st.v(i) -= mom / mt;
  }
  const double w = angular_momentum(m, st.q, st.v) / inertia(m, st.q);
  for (int i = 0; i < 3; ++i) st.v(i) -= Complex(0.0, w) * st.q(i);
  return st;
}

CVector random_cvector(int n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * Complex(u(rng), u(rng));
  return v;
}

}  // namespace oracle
