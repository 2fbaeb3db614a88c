#include "collision_spin/mass_system.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "collision_spin/errors.hpp"

namespace cspin {

namespace {

constexpr double kCollisionGuard = 1e-13;

Complex difference(const RVector& b, const CVector& z) {
  Complex d = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) d += b(k) * z(k);
  return d;
}

}  // namespace

MassSystem::MassSystem(std::vector<double> masses) : masses_(std::move(masses)) {
  const int n = body_count();
  if (n < 2) throw ConfigError("a mass system needs at least two bodies");
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("masses must be positive and finite");
    total_mass_ += m;
  }

  // Relative coordinates x_i = q_i - q_n; with sum m_i q_i = 0 this gives
  // q_i = x_i - (sum_j m_j x_j) / m_tot, where x_n = 0.
  reduction_ = RMatrix::Zero(n, n - 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n - 1; ++k) {
      reduction_(i, k) = (i == k ? 1.0 : 0.0) - masses_[k] / total_mass_;
    }
  }
  const RVector m = Eigen::Map<const RVector>(masses_.data(), n);
  mass_matrix_ = reduction_.transpose() * m.asDiagonal() * reduction_;

  Eigen::LLT<RMatrix> llt(mass_matrix_);
  if (llt.info() != Eigen::Success) throw ConfigError("mass matrix is not positive definite");
  const RMatrix lower = llt.matrixL();
  orthonormalizer_ = lower.transpose().triangularView<Eigen::Upper>().solve(
      RMatrix::Identity(n - 1, n - 1));
  positions_map_ = reduction_ * orthonormalizer_;
  reducer_ = lower.transpose();

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pairs_.push_back({i, j, masses_[i] * masses_[j],
                        (positions_map_.row(i) - positions_map_.row(j)).transpose()});
    }
  }
}

MassSystem MassSystem::from_json(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed mass-system JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("masses") || !doc["masses"].is_array()) {
    throw ConfigError("mass-system JSON must be an object with a \"masses\" array");
  }
  std::vector<double> masses;
  for (const auto& m : doc["masses"]) {
    if (!m.is_number()) throw ConfigError("masses must be numbers");
    masses.push_back(m.get<double>());
  }
  return MassSystem(std::move(masses));
}

void MassSystem::check_dim(const CVector& z, Eigen::Index expected, const char* what) const {
  if (z.size() != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(z.size()));
  }
}

CVector MassSystem::positions(const CVector& z) const {
  check_dim(z, reduced_dim(), "positions");
  return positions_map_.cast<Complex>() * z;
}

CVector MassSystem::reduce(const CVector& q) const {
  check_dim(q, body_count(), "reduce");
  const int n = body_count();
  CVector x(n - 1);
  for (int k = 0; k < n - 1; ++k) x(k) = q(k) - q(n - 1);
  return reducer_.cast<Complex>() * x;  // z = C^{-1} x = L^T x
}

double MassSystem::moment_of_inertia(const CVector& z) const {
  check_dim(z, reduced_dim(), "moment_of_inertia");
  return z.squaredNorm();
}

void MassSystem::check_collision(const CVector& z) const {
  const double scale = std::max(z.norm() / std::sqrt(total_mass_), 1e-300);
  for (const auto& p : pairs_) {
    const double d = std::abs(difference(p.b, z));
    if (d < kCollisionGuard * scale) throw CollisionError(p.i, p.j, d);
  }
}

double MassSystem::potential(const CVector& z) const {
  check_dim(z, reduced_dim(), "potential");
  check_collision(z);
  double u = 0.0;
  for (const auto& p : pairs_) {
    const Complex d = difference(p.b, z);
    u += p.mm / std::abs(d);
  }
  return u;
}

CVector MassSystem::potential_gradient(const CVector& z) const {
  check_dim(z, reduced_dim(), "potential_gradient");
  check_collision(z);
  CVector g = CVector::Zero(z.size());
  for (const auto& p : pairs_) {
    const Complex d = difference(p.b, z);
    const double r = std::abs(d);
    const Complex dd = -p.mm * d / (r * r * r);
    for (Eigen::Index k = 0; k < z.size(); ++k) g(k) += p.b(k) * dd;
  }
  return g;
}

RMatrix MassSystem::potential_hessian(const CVector& z) const {
  check_dim(z, reduced_dim(), "potential_hessian");
  check_collision(z);
  const Eigen::Index dim = z.size();
  RMatrix h = RMatrix::Zero(2 * dim, 2 * dim);
  for (const auto& p : pairs_) {
    const Complex d = difference(p.b, z);
    const double r = std::abs(d);
    const double r3 = r * r * r;
    const double r5 = r3 * r * r;
    Eigen::Matrix2d hd;
    const double dx = d.real();
    const double dy = d.imag();
    hd << 3.0 * dx * dx / r5 - 1.0 / r3, 3.0 * dx * dy / r5,
          3.0 * dx * dy / r5, 3.0 * dy * dy / r5 - 1.0 / r3;
    hd *= p.mm;
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (Eigen::Index l = 0; l < dim; ++l) {
        h.block<2, 2>(2 * k, 2 * l) += p.b(k) * p.b(l) * hd;
      }
    }
  }
  return h;
}

double MassSystem::shape_potential(const CVector& s) const {
  check_dim(s, shape_dim(), "shape_potential");
  const CVector u = homogeneous(s);
  return u.norm() * potential(u);
}

CVector MassSystem::shape_potential_gradient(const CVector& s) const {
  check_dim(s, shape_dim(), "shape_potential_gradient");
  const CVector u = homogeneous(s);
  const double norm = u.norm();
  const CVector gu = potential_gradient(u);
  return (potential(u) / norm) * s + norm * gu.head(s.size());
}

RMatrix MassSystem::shape_potential_hessian(const CVector& s) const {
  check_dim(s, shape_dim(), "shape_potential_hessian");
  const CVector u = homogeneous(s);
  const double norm = u.norm();
  const double uval = potential(u);
  const RVector sr = to_real(s);
  const RVector gs = to_real(CVector(potential_gradient(u).head(s.size())));
  const Eigen::Index m = sr.size();
  const RMatrix huu = potential_hessian(u);

  // V = N U with N = ||(s,1)||; grad N = s/N, Hess N = I/N - s s^T / N^3.
  const RMatrix hess_norm =
      RMatrix::Identity(m, m) / norm - sr * sr.transpose() / (norm * norm * norm);
  const RVector grad_norm = sr / norm;
  return uval * hess_norm + grad_norm * gs.transpose() + gs * grad_norm.transpose() +
         norm * huu.topLeftCorner(m, m);
}

double MassSystem::total_energy(const CVector& z, const CVector& zeta) const {
  check_dim(zeta, reduced_dim(), "total_energy");
  return 0.5 * zeta.squaredNorm() - potential(z);
}

Complex hermitian_mass(const CVector& v, const CVector& w) {
  if (v.size() != w.size()) {
    throw DimensionError("hermitian_mass: length mismatch (" + std::to_string(v.size()) +
                         " vs " + std::to_string(w.size()) + ")");
  }
  return v.dot(w);  // Eigen's dot conjugates the first argument
}

}  // namespace cspin
