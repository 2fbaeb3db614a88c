#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "collision_spin/linalg.hpp"

namespace cspin {

/// A scalar potential on R^k with W(0) = 0 and a critical point at 0.
///
/// log_value / log_grad_norm_sq are optional log-space evaluations used when
/// W underflows near 0 (flat potentials); both must be set or neither.
struct Potential {
  std::string name;
  int dim = 2;
  std::function<double(const RVector&)> value;
  std::function<RVector(const RVector&)> gradient;
  std::function<double(const RVector&)> log_value;
  std::function<double(const RVector&)> log_grad_norm_sq;
  /// Suggested Lojasiewicz exponent and constant (|grad W|^2 >= C W^alpha).
  double alpha = 1.5;
  double loj_constant = 1.0;
};

/// |x|^2: |grad W|^2 = 4 W >= W^1.5 while W <= 16.
Potential quadratic_potential(int dim = 2);
/// |x|^4: |grad W|^2 = 16 W^1.5, so alpha = 1.5 with C = 16.
Potential quartic_potential(int dim = 2);
/// exp(-1/|x|^2): flat at 0, no Lojasiewicz inequality with alpha < 2.
Potential flat_potential(int dim = 2);
/// Polynomial from {"dim": k, "terms": [{"coef": a, "powers": [p1, ..]}, ..],
///                  "alpha": 1.5, "loj_constant": 1.0}.
/// A constant term is rejected since W(0) must vanish.
Potential polynomial_potential(std::string_view json_document);

enum class NormalizationMode {
  explicit_constant,   // keep C and use lambda = k2 C (alpha-1) W0^(alpha-1)
  rescaled_potential,  // rescale W so that C = 1 and adjust the drift constant
};

struct ModelFlow {
  Potential W;
  double alpha = 1.5;
  double k = 1.0;
  double c = 0.0;  // bound on |gamma| / |grad^ W|; must satisfy c < k
  /// gamma(x, grad^ W(x)); empty means gamma = 0.
  std::function<RVector(const RVector&, const RVector&)> gamma;
  /// Riemannian metric G(x); empty means identity. grad^ W = G^{-1} grad W.
  std::function<RMatrix(const RVector&)> metric;
  double loj_constant = 1.0;
  NormalizationMode mode = NormalizationMode::explicit_constant;
};

/// c |grad^ W| J grad^ W / |grad^ W| with J the quarter turn in the first two
/// coordinates: orthogonal to the gradient for the identity metric.
std::function<RVector(const RVector&, const RVector&)> orthogonal_perturbation(double c);

struct LojasiewiczCheck {
  bool holds = false;
  double worst_ratio = 0.0;      // min |grad^ W|^2 / (C |W|^alpha)
  double log_worst_ratio = 0.0;  // its logarithm (finite even when the ratio underflows)
  RVector worst_point;
  std::size_t samples = 0;
};

/// Deterministic cloud in the ball |x| <= radius: log-spaced radii down to
/// radius * 1e-4 times quasi-random directions.
std::vector<RVector> radial_sample_cloud(int dim, double radius, int radii = 60, int directions = 24);

LojasiewiczCheck check_lojasiewicz(const Potential& W, const std::vector<RVector>& region,
                                   double alpha, double loj_constant = 1.0,
                                   const std::function<RMatrix(const RVector&)>& metric = {});

struct DecaySample {
  double tau = 0.0;
  RVector x;
  double W = 0.0;
  double bound = 0.0;
  double arclength = 0.0;
  double weighted_integral = 0.0;  // int_1^tau W s^eps ds (0 for tau <= 1)
};

struct DecayReport {
  std::vector<DecaySample> samples;
  double W0 = 0.0;
  double alpha = 1.5;
  double epsilon = 0.5;  // (1/(alpha-1) - 1)/2
  double k = 1.0;
  double c = 0.0;
  double k2 = 1.0;       // k - c
  double loj_constant = 1.0;
  double lambda = 0.0;
  double violation_max = 0.0;  // max W(tau) - bound(tau)
  bool monotone = true;
  double max_increase = 0.0;
  double tau_max = 0.0;

  double bound(double tau) const;
};

struct FlowOptions {
  double rtol = 1e-12;
  double atol = 1e-16;
  int samples = 400;
  double region_factor = 2.0;  // verified neighbourhood: |x| <= region_factor |x0|
  int precondition_radii = 60;
  int precondition_directions = 24;
};

/// Integrates x' = -k grad^ W(x) + gamma(x) from x0 on [0, tau_max], with the
/// arclength (metric norm) and int_1^tau W s^eps ds carried in the state.
/// Preconditions checked on a sample cloud: the Lojasiewicz inequality and
/// |gamma| <= c |grad^ W|. Throws PreconditionError or DivergenceError.
DecayReport run_model_flow(const ModelFlow& flow, const RVector& x0, double tau_max,
                           const FlowOptions& options = {});

struct ArclengthCertificate {
  bool finite = false;
  double tail_bound = 0.0;      // bound on the total arclength int_0^inf |x'|
  double measured = 0.0;        // accumulated arclength up to tau_max
  double head_term = 0.0;       // sqrt(W0 - W(1))
  double weighted_tail = 0.0;   // W(1) + (1+eps) int_1^inf W tau^eps, with the bound past tau_max
  double decay_factor = 0.0;    // int_1^inf tau^-(1+eps) = 1/eps
  double cauchy_time = 0.0;     // tau* where the certified remaining arclength drops below tol
  double cauchy_sup = 0.0;      // measured L(tau_max) - L(tau*)
  bool cauchy_reached = false;
};

/// Cauchy-Schwarz certificate for the arclength of a model flow.
/// Throws PreconditionError when eps <= 0 (alpha >= 2).
ArclengthCertificate arclength_certificate(const DecayReport& report, double cauchy_tol = 1e-2);

/// int_1^inf tau^-(1+eps) d tau evaluated by double-exponential quadrature.
double decay_tail_factor(double epsilon);

}  // namespace cspin
