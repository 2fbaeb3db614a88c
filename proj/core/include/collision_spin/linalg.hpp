#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cspin {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Complex vectors are mapped to real ones with interleaved (re, im) pairs:
// (a0 + i b0, a1 + i b1, ...) <-> (a0, b0, a1, b1, ...).
inline RVector to_real(const CVector& v) {
  RVector out(2 * v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out(2 * k) = v(k).real();
    out(2 * k + 1) = v(k).imag();
  }
  return out;
}

inline CVector to_complex(const RVector& v) {
  CVector out(v.size() / 2);
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = Complex(v(2 * k), v(2 * k + 1));
  return out;
}

// Multiplication by i in the real layout: (a, b) -> (-b, a).
inline RVector times_i(const RVector& v) {
  RVector out(v.size());
  for (Eigen::Index k = 0; k + 1 < v.size(); k += 2) {
    out(k) = -v(k + 1);
    out(k + 1) = v(k);
  }
  return out;
}

// (s, 1): the homogeneous representative of an affine chart point.
inline CVector homogeneous(const CVector& s) {
  CVector u(s.size() + 1);
  u.head(s.size()) = s;
  u(s.size()) = 1.0;
  return u;
}

// (omega, 0)
inline CVector pad_zero(const CVector& omega) {
  CVector u = CVector::Zero(omega.size() + 1);
  u.head(omega.size()) = omega;
  return u;
}

}  // namespace cspin
