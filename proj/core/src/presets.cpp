#include "collision_spin/presets.hpp"

#include <cmath>
#include <limits>

#include "collision_spin/errors.hpp"
#include "collision_spin/shape_geometry.hpp"

namespace cspin {

namespace {

MassSystem equal_masses() { return MassSystem({1.0, 1.0, 1.0}); }

CollisionPreset homothetic(std::string name, const MassSystem& mass, const CVector& guess) {
  CollisionPreset p{std::move(name), mass, find_cc(mass, guess), {}, 0.0, 0.0};
  // Released from rest at r = 1: v = 0, w = 0, h = -V0.
  p.initial = {1.0, 0.0, p.cc.s0, CVector::Zero(mass.shape_dim()), 0.0};
  p.h = -p.cc.V0;
  return p;
}

double slowest_stable_rate(const CentralConfig& cc) {
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& pair : cc.lambda_pairs) {
    if (pair.minus.real() < 0.0) rate = std::min(rate, -pair.minus.real());
  }
  return rate;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"lagrange-homothetic", "euler-homothetic", "near-homothetic-perturbed", "spiral-demo"};
}

bool is_collision_preset(std::string_view name) {
  return name == "lagrange-homothetic" || name == "euler-homothetic" ||
         name == "near-homothetic-perturbed";
}

CollisionPreset lagrange_homothetic() {
  const MassSystem mass = equal_masses();
  CVector guess(1);
  guess(0) = Complex(0.05, 0.95);
  auto p = homothetic("lagrange-homothetic", mass, guess);
  p.expected_decay_rate = slowest_stable_rate(p.cc);
  return p;
}

CollisionPreset euler_homothetic() {
  const MassSystem mass = equal_masses();
  CVector guess(1);
  guess(0) = Complex(0.3, 0.0);
  auto p = homothetic("euler-homothetic", mass, guess);
  p.expected_decay_rate = slowest_stable_rate(p.cc);
  return p;
}

CollisionPreset near_homothetic_perturbed(const PerturbationOptions& options) {
  CollisionPreset p = lagrange_homothetic();
  p.name = "near-homothetic-perturbed";
  p.h = -1.0;

  const MassSystem& mass = p.mass;
  const CentralConfig& cc = p.cc;
  const FSMetric metric(cc.s0);
  Eigen::GeneralizedSelfAdjointEigenSolver<RMatrix> eig(mass.shape_potential_hessian(cc.s0),
                                                        metric.matrix());
  // Any c > 0 gives a stable lambda_-; use the largest.
  const Eigen::Index j = eig.eigenvalues().size() - 1;
  const double c = eig.eigenvalues()(j);
  if (!(c > 0.0)) throw PreconditionError("near_homothetic_perturbed: no stable shape direction");
  RVector dir = eig.eigenvectors().col(j);
  dir /= std::sqrt(metric.norm_sq(dir));
  const double lambda_minus = restpoint_spectrum(cc.v0, c).minus.real();

  const CVector s = cc.s0 + options.epsilon * to_complex(dir);
  const CVector w = options.epsilon * lambda_minus * to_complex(dir);
  const double r = options.r_start;
  BlownUpState start{r, energy_consistent_v(mass, r, s, w, p.h), s, w, 0.0};

  IntegrationControls back;
  back.t_end = -options.backward_time;
  back.rtol = options.rtol;
  back.atol = options.atol;
  back.stop_on_departure = false;
  const TrajectoryRecord rec = integrate_blownup(mass, start, p.h, back);
  if (rec.termination != Termination::completed) {
    throw IntegrationError("near_homothetic_perturbed: backward run ended early: " + rec.diagnostic);
  }
  const TrajectorySample& end = rec.samples.back();
  p.initial = {end.r, end.v, end.s, end.w, 0.0};
  p.expected_decay_rate = -lambda_minus;
  return p;
}

CollisionPreset collision_preset(std::string_view name) {
  if (name == "lagrange-homothetic") return lagrange_homothetic();
  if (name == "euler-homothetic") return euler_homothetic();
  if (name == "near-homothetic-perturbed") return near_homothetic_perturbed();
  throw ConfigError("unknown collision preset: " + std::string(name));
}

ShapeCurve spiral_preset(double c, double t_end) { return spiral_curve(c, t_end); }

}  // namespace cspin
