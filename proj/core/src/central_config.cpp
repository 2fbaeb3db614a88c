#include "collision_spin/central_config.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "collision_spin/errors.hpp"
#include "collision_spin/shape_geometry.hpp"

namespace cspin {

RestpointPair restpoint_spectrum(double v0, double c) {
  const double d = v0 * v0 + 16.0 * c;
  const Complex disc = std::sqrt(Complex(d, 0.0));
  const Complex plus = (-v0 + disc) / 4.0;
  // Real roots: take lambda_- from the product -c to avoid cancellation, so
  // that lambda_- vanishes exactly when c does, even for tiny |c|.
  if (d >= 0.0 && plus != 0.0) return {plus, -c / plus};
  return {plus, (-v0 - disc) / 4.0};
}

RVector shape_gradient(const MassSystem& mass, const CVector& s) {
  return to_real(mass.shape_potential_gradient(s));
}

RVector fs_gradient(const MassSystem& mass, const CVector& s) {
  return FSMetric(s).solve(shape_gradient(mass, s));
}

RMatrix fs_hessian(const MassSystem& mass, const CVector& s) {
  const FSMetric metric(s);
  const RMatrix hess = mass.shape_potential_hessian(s);
  const RVector fs_grad = metric.solve(shape_gradient(mass, s));
  const Eigen::Index m = hess.rows();
  RMatrix out(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const RVector e = RVector::Unit(m, j);
    out.col(j) = metric.solve(hess.col(j) - metric.directional_derivative(e) * fs_grad);
  }
  return out;
}

std::vector<double> fs_hessian_spectrum(const MassSystem& mass, const CVector& s) {
  const FSMetric metric(s);
  RMatrix hess = mass.shape_potential_hessian(s);
  hess = 0.5 * (hess + hess.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<RMatrix> solver(hess, metric.matrix());
  const RVector ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

CVector cc_residual_full(const MassSystem& mass, const CVector& q, double lambda) {
  if (q.size() != mass.body_count()) throw DimensionError("cc_residual_full: wrong body count");
  const int n = mass.body_count();
  const auto& m = mass.masses();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(q(i) - q(j)) < 1e-13 * std::max(q.norm(), 1e-300)) {
        throw CollisionError(i, j, std::abs(q(i) - q(j)));
      }
    }
  }
  CVector res(n);
  for (int i = 0; i < n; ++i) {
    Complex grad = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Complex d = q(i) - q(j);
      const double r = std::abs(d);
      grad -= m[i] * m[j] * d / (r * r * r);
    }
    res(i) = grad + lambda * m[i] * q(i);
  }
  return res;
}

namespace {

std::optional<RVector> try_gradient(const MassSystem& mass, const RVector& s) {
  try {
    return shape_gradient(mass, to_complex(s));
  } catch (const CollisionError&) {
    return std::nullopt;
  }
}

std::optional<double> try_potential(const MassSystem& mass, const RVector& s) {
  try {
    return mass.shape_potential(to_complex(s));
  } catch (const CollisionError&) {
    return std::nullopt;
  }
}

}  // namespace

CentralConfig find_cc(const MassSystem& mass, const CVector& s_init, const CCSolverOptions& options) {
  if (s_init.size() != mass.shape_dim()) throw DimensionError("find_cc: wrong shape dimension");
  RVector s = to_real(s_init);
  std::vector<double> trace;

  auto grad = try_gradient(mass, s);
  if (!grad) throw PreconditionError("find_cc: initial shape is a collision shape");

  for (int it = 0; it <= options.max_iterations; ++it) {
    const double res = grad->norm();
    trace.push_back(res);
    if (res < options.tol) {
      CentralConfig cc;
      cc.s0 = to_complex(s);
      cc.residual = res;
      cc.iterations = it;
      attach_spectrum(mass, cc, options.degenerate_rel_tol);
      return cc;
    }
    if (it == options.max_iterations) break;

    const RMatrix hess = mass.shape_potential_hessian(to_complex(s));
    const Eigen::FullPivLU<RMatrix> lu(hess);
    bool accepted = false;
    if (lu.isInvertible()) {
      const RVector step = lu.solve(-*grad);
      const double merit = 0.5 * res * res;
      for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
        const RVector trial = s + alpha * step;
        const auto g_trial = try_gradient(mass, trial);
        if (!g_trial) continue;
        // d/dalpha of 1/2|grad V|^2 along a Newton step is -|grad V|^2.
        if (0.5 * g_trial->squaredNorm() <= merit * (1.0 - 2e-4 * alpha)) {
          s = trial;
          grad = g_trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      const FSMetric metric(to_complex(s));
      const RVector step = -metric.solve(*grad);
      const auto v_here = try_potential(mass, s);
      const double slope = grad->dot(step);
      for (double alpha = 1.0; alpha > 1e-14; alpha *= 0.5) {
        const RVector trial = s + alpha * step;
        const auto v_trial = try_potential(mass, trial);
        if (!v_trial) continue;
        if (*v_trial <= *v_here + 1e-4 * alpha * slope) {
          s = trial;
          grad = try_gradient(mass, trial);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted || !grad) {
      throw DivergenceError("find_cc: line search failed", trace);
    }
    if (!std::isfinite(s.norm()) || s.norm() > options.chart_limit) {
      throw ChartError("find_cc: iterate left the chart");
    }
  }
  throw DivergenceError("find_cc: no convergence within " +
                            std::to_string(options.max_iterations) + " iterations",
                        trace);
}

void attach_spectrum(const MassSystem& mass, CentralConfig& cc, double degenerate_rel_tol) {
  cc.V0 = mass.shape_potential(cc.s0);
  cc.v0 = -std::sqrt(2.0 * cc.V0);
  cc.residual = shape_gradient(mass, cc.s0).norm();
  cc.hessian_spectrum = fs_hessian_spectrum(mass, cc.s0);
  cc.lambda_pairs.clear();
  double scale = 0.0;
  for (double c : cc.hessian_spectrum) {
    cc.lambda_pairs.push_back(restpoint_spectrum(cc.v0, c));
    scale = std::max(scale, std::abs(c));
  }
  cc.degenerate = false;
  for (double c : cc.hessian_spectrum) {
    if (std::abs(c) < degenerate_rel_tol * scale) cc.degenerate = true;
  }
}

Classification classify(const MassSystem& mass, const CentralConfig& cc, double tol_degenerate) {
  Classification out;
  double scale = 0.0;
  for (double c : cc.hessian_spectrum) scale = std::max(scale, std::abs(c));
  out.restpoint_spectrum.push_back(cc.v0);
  for (std::size_t i = 0; i < cc.hessian_spectrum.size(); ++i) {
    const double c = cc.hessian_spectrum[i];
    if (c < 0.0) ++out.morse_index;
    if (std::abs(c) < tol_degenerate * scale) ++out.near_zero_count;
    const RestpointPair pair = restpoint_spectrum(cc.v0, c);
    out.restpoint_spectrum.push_back(pair.plus);
    out.restpoint_spectrum.push_back(pair.minus);
    if (!(pair.plus.real() > 0.0)) out.lambda_plus_positive = false;
    for (const Complex& l : {pair.plus, pair.minus}) {
      if (l.imag() != 0.0 && !(l.real() > 0.0)) out.nonreal_unstable = false;
    }
  }
  out.nondegenerate = out.near_zero_count == 0;

  const CVector z = from_chart({1.0, 0.0, cc.s0});
  const CVector q = mass.positions(z);
  const double lambda = mass.potential(z) / mass.moment_of_inertia(z);
  out.position_residual = cc_residual_full(mass, q, lambda).norm();
  return out;
}

std::vector<RVector> halton_ball_points(int dim, int count, double radius, int seed) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim > static_cast<int>(std::size(kPrimes))) {
    throw PreconditionError("halton_ball_points: dimension too large");
  }
  auto radical_inverse = [](long long index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
      result += f * static_cast<double>(index % base);
      index /= base;
      f /= base;
    }
    return result;
  };
  std::vector<RVector> points;
  long long index = 1 + 1009LL * seed;
  while (static_cast<int>(points.size()) < count) {
    RVector p(dim);
    for (int d = 0; d < dim; ++d) p(d) = radius * (2.0 * radical_inverse(index, kPrimes[d]) - 1.0);
    ++index;
    if (p.norm() <= radius) points.push_back(std::move(p));
  }
  return points;
}

std::vector<CentralConfig> multistart_cc(const MassSystem& mass, const MultistartOptions& options) {
  const int dim = 2 * mass.shape_dim();
  const auto starts = halton_ball_points(dim, options.starts, options.radius, options.seed);
  std::vector<std::optional<CentralConfig>> solved(starts.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        solved[i] = find_cc(mass, to_complex(starts[i]), options.solver);
      } catch (const Error&) {
        // Starts that diverge, hit a collision or leave the chart are dropped.
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(starts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<CentralConfig> catalog;
  for (auto& cc : solved) {
    if (!cc) continue;
    const bool seen = std::any_of(catalog.begin(), catalog.end(), [&](const CentralConfig& other) {
      return (other.s0 - cc->s0).norm() < options.dedup_tol * std::max(1.0, cc->s0.norm());
    });
    if (!seen) catalog.push_back(std::move(*cc));
  }
  std::sort(catalog.begin(), catalog.end(), [](const CentralConfig& a, const CentralConfig& b) {
    if (std::abs(a.V0 - b.V0) > 1e-9 * std::max(1.0, std::abs(a.V0))) return a.V0 < b.V0;
    const RVector ra = to_real(a.s0);
    const RVector rb = to_real(b.s0);
    for (Eigen::Index k = 0; k < ra.size(); ++k) {
      if (std::abs(ra(k) - rb(k)) > 1e-9) return ra(k) < rb(k);
    }
    return false;
  });
  return catalog;
}

}  // namespace cspin
