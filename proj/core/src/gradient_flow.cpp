#include "collision_spin/gradient_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <json.hpp>

#include "collision_spin/central_config.hpp"
#include "collision_spin/errors.hpp"
#include "collision_spin/ode.hpp"

namespace cspin {

namespace {

void check_dim(const Potential& W, const RVector& x) {
  if (x.size() != W.dim) throw DimensionError("potential " + W.name + ": wrong point dimension");
}

// |g|^2 in the metric G, i.e. g^T G^{-1} g for a Euclidean gradient g.
struct MetricContext {
  const std::function<RMatrix(const RVector&)>& metric;

  RVector raise(const RVector& x, const RVector& grad) const {
    if (!metric) return grad;
    return metric(x).llt().solve(grad);
  }
  double norm_sq(const RVector& x, const RVector& v) const {
    if (!metric) return v.squaredNorm();
    return v.dot(metric(x) * v);
  }
};

}  // namespace

Potential quadratic_potential(int dim) {
  Potential p;
  p.name = "quad";
  p.dim = dim;
  p.value = [](const RVector& x) { return x.squaredNorm(); };
  p.gradient = [](const RVector& x) -> RVector { return 2.0 * x; };
  p.alpha = 1.5;
  p.loj_constant = 1.0;
  return p;
}

Potential quartic_potential(int dim) {
  Potential p;
  p.name = "quartic";
  p.dim = dim;
  p.value = [](const RVector& x) {
    const double r2 = x.squaredNorm();
    return r2 * r2;
  };
  p.gradient = [](const RVector& x) -> RVector { return 4.0 * x.squaredNorm() * x; };
  p.alpha = 1.5;
  p.loj_constant = 16.0;
  return p;
}

Potential flat_potential(int dim) {
  Potential p;
  p.name = "flat";
  p.dim = dim;
  p.value = [](const RVector& x) {
    const double r2 = x.squaredNorm();
    return r2 == 0.0 ? 0.0 : std::exp(-1.0 / r2);
  };
  p.gradient = [](const RVector& x) -> RVector {
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) return RVector::Zero(x.size());
    return std::exp(-1.0 / r2) * 2.0 / (r2 * r2) * x;
  };
  p.log_value = [](const RVector& x) { return -1.0 / x.squaredNorm(); };
  // |grad W|^2 = 4 W^2 / |x|^6
  p.log_grad_norm_sq = [](const RVector& x) {
    const double r2 = x.squaredNorm();
    return -2.0 / r2 + std::log(4.0) - 3.0 * std::log(r2);
  };
  p.alpha = 1.5;
  p.loj_constant = 1.0;
  return p;
}

Potential polynomial_potential(std::string_view json_document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_document);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("polynomial potential: ") + e.what());
  }
  struct Term {
    double coef;
    std::vector<int> powers;
  };
  std::vector<Term> terms;
  int dim = 0;
  try {
    dim = doc.at("dim").get<int>();
    if (dim < 1) throw ConfigError("polynomial potential: dim must be positive");
    for (const auto& t : doc.at("terms")) {
      Term term{t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()};
      if (static_cast<int>(term.powers.size()) != dim) {
        throw ConfigError("polynomial potential: powers length must equal dim");
      }
      if (std::any_of(term.powers.begin(), term.powers.end(), [](int e) { return e < 0; })) {
        throw ConfigError("polynomial potential: negative power");
      }
      if (std::all_of(term.powers.begin(), term.powers.end(), [](int e) { return e == 0; }) &&
          term.coef != 0.0) {
        throw ConfigError("polynomial potential: constant term (W(0) must be 0)");
      }
      terms.push_back(std::move(term));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("polynomial potential: ") + e.what());
  }

  Potential p;
  p.name = "file";
  p.dim = dim;
  p.alpha = doc.value("alpha", 1.5);
  p.loj_constant = doc.value("loj_constant", 1.0);
  p.value = [terms](const RVector& x) {
    double sum = 0.0;
    for (const auto& t : terms) {
      double m = t.coef;
      for (std::size_t d = 0; d < t.powers.size(); ++d) m *= std::pow(x(d), t.powers[d]);
      sum += m;
    }
    return sum;
  };
  p.gradient = [terms, dim](const RVector& x) -> RVector {
    RVector g = RVector::Zero(dim);
    for (const auto& t : terms) {
      for (int j = 0; j < dim; ++j) {
        if (t.powers[j] == 0) continue;
        double m = t.coef * t.powers[j];
        for (int d = 0; d < dim; ++d) {
          m *= std::pow(x(d), d == j ? t.powers[d] - 1 : t.powers[d]);
        }
        g(j) += m;
      }
    }
    return g;
  };
  return p;
}

std::function<RVector(const RVector&, const RVector&)> orthogonal_perturbation(double c) {
  return [c](const RVector&, const RVector& grad_hat) -> RVector {
    if (grad_hat.size() < 2) throw DimensionError("orthogonal_perturbation needs dim >= 2");
    RVector out = RVector::Zero(grad_hat.size());
    out(0) = -c * grad_hat(1);
    out(1) = c * grad_hat(0);
    return out;
  };
}

std::vector<RVector> radial_sample_cloud(int dim, double radius, int radii, int directions) {
  std::vector<RVector> dirs;
  if (dim == 1) {
    dirs = {RVector::Constant(1, 1.0), RVector::Constant(1, -1.0)};
  } else {
    for (const RVector& p : halton_ball_points(dim, 4 * directions, 1.0, 0)) {
      if (p.norm() > 0.2) dirs.push_back(p.normalized());
      if (static_cast<int>(dirs.size()) == directions) break;
    }
  }
  std::vector<RVector> cloud;
  for (int i = 0; i < radii; ++i) {
    const double t = radii == 1 ? 1.0 : static_cast<double>(i) / (radii - 1);
    const double r = radius * std::pow(1e-4, 1.0 - t);
    for (const RVector& d : dirs) cloud.push_back(r * d);
  }
  return cloud;
}

LojasiewiczCheck check_lojasiewicz(const Potential& W, const std::vector<RVector>& region,
                                   double alpha, double loj_constant,
                                   const std::function<RMatrix(const RVector&)>& metric) {
  if (!(loj_constant > 0.0)) throw PreconditionError("check_lojasiewicz: C must be positive");
  const MetricContext ctx{metric};
  LojasiewiczCheck out;
  out.log_worst_ratio = std::numeric_limits<double>::infinity();
  for (const RVector& x : region) {
    check_dim(W, x);
    double log_ratio;
    if (W.log_value && W.log_grad_norm_sq && !metric) {
      if (x.squaredNorm() == 0.0) continue;
      log_ratio = W.log_grad_norm_sq(x) - std::log(loj_constant) - alpha * W.log_value(x);
    } else {
      const double w = std::abs(W.value(x));
      if (w == 0.0) continue;
      const RVector g = W.gradient(x);
      const double gn = ctx.norm_sq(x, ctx.raise(x, g));
      log_ratio = std::log(gn) - std::log(loj_constant) - alpha * std::log(w);
    }
    ++out.samples;
    if (log_ratio < out.log_worst_ratio) {
      out.log_worst_ratio = log_ratio;
      out.worst_point = x;
    }
  }
  out.worst_ratio = std::exp(out.log_worst_ratio);
  // Equality cases (e.g. the quartic with C = 16) must not fail on rounding.
  out.holds = out.samples > 0 && out.log_worst_ratio >= -1e-12;
  return out;
}

double DecayReport::bound(double tau) const {
  return W0 / std::pow(1.0 + lambda * tau, 1.0 / (alpha - 1.0));
}

DecayReport run_model_flow(const ModelFlow& flow, const RVector& x0, double tau_max,
                           const FlowOptions& options) {
  const Potential& W = flow.W;
  check_dim(W, x0);
  if (!(flow.alpha > 1.0 && flow.alpha < 2.0)) {
    throw PreconditionError("run_model_flow: alpha must lie in (1, 2)");
  }
  if (!(flow.k > 0.0) || !(flow.c >= 0.0) || !(flow.c < flow.k)) {
    throw PreconditionError("run_model_flow: need k > 0 and 0 <= c < k");
  }
  if (!(tau_max > 0.0)) throw PreconditionError("run_model_flow: tau_max must be positive");
  const double W0 = W.value(x0);
  if (!(W0 > 0.0)) throw PreconditionError("run_model_flow: W(x0) must be positive");

  const MetricContext ctx{flow.metric};
  const double region_radius = options.region_factor * x0.norm();
  const auto cloud = radial_sample_cloud(W.dim, region_radius, options.precondition_radii,
                                         options.precondition_directions);
  const auto loj = check_lojasiewicz(W, cloud, flow.alpha, flow.loj_constant, flow.metric);
  if (!loj.holds) {
    throw PreconditionError("run_model_flow: Lojasiewicz inequality fails in |x| <= " +
                            std::to_string(region_radius) +
                            " (worst ratio " + std::to_string(loj.worst_ratio) + ")");
  }
  if (flow.gamma) {
    for (const RVector& x : cloud) {
      const RVector gh = ctx.raise(x, W.gradient(x));
      const double lhs = std::sqrt(ctx.norm_sq(x, flow.gamma(x, gh)));
      const double rhs = flow.c * std::sqrt(ctx.norm_sq(x, gh));
      if (lhs > rhs * (1.0 + 1e-12) + 1e-300) {
        throw PreconditionError("run_model_flow: |gamma| exceeds c |grad W| on the sample cloud");
      }
    }
  }

  DecayReport rep;
  rep.W0 = W0;
  rep.alpha = flow.alpha;
  rep.epsilon = (1.0 / (flow.alpha - 1.0) - 1.0) / 2.0;
  rep.k = flow.k;
  rep.c = flow.c;
  rep.k2 = flow.k - flow.c;
  rep.loj_constant = flow.loj_constant;
  rep.tau_max = tau_max;
  if (flow.mode == NormalizationMode::explicit_constant) {
    rep.lambda = rep.k2 * flow.loj_constant * (flow.alpha - 1.0) * std::pow(W0, flow.alpha - 1.0);
  } else {
    // W~ = kappa W satisfies the inequality with C = 1; the same orbit is the
    // flow of W~ with drift constant k/kappa.
    const double kappa = std::pow(flow.loj_constant, -1.0 / (2.0 - flow.alpha));
    const double k2_scaled = rep.k2 / kappa;
    rep.lambda = k2_scaled * (flow.alpha - 1.0) * std::pow(kappa * W0, flow.alpha - 1.0);
  }

  const Eigen::Index dim = W.dim;
  const double eps = rep.epsilon;
  bool weighted = false;
  auto rhs = [&](double tau, const RVector& y, RVector& dy) {
    const RVector x = y.head(dim);
    const RVector gh = ctx.raise(x, W.gradient(x));
    RVector xdot = -flow.k * gh;
    if (flow.gamma) xdot += flow.gamma(x, gh);
    dy.resize(y.size());
    dy.head(dim) = xdot;
    dy(dim) = std::sqrt(ctx.norm_sq(x, xdot));
    dy(dim + 1) = weighted ? W.value(x) * std::pow(tau, eps) : 0.0;
  };

  std::vector<double> grid{0.0};
  const int n = std::max(options.samples, 2);
  const double lo = std::min(1e-3, tau_max * 1e-3);
  for (int i = 0; i < n; ++i) {
    grid.push_back(lo * std::pow(tau_max / lo, static_cast<double>(i) / (n - 1)));
  }
  if (tau_max > 1.0) grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.back() = tau_max;

  auto emit = [&](double tau, const RVector& y) {
    DecaySample smp;
    smp.tau = tau;
    smp.x = y.head(dim);
    smp.W = W.value(smp.x);
    smp.bound = rep.bound(tau);
    smp.arclength = y(dim);
    smp.weighted_integral = y(dim + 1);
    if (!smp.x.allFinite() || smp.x.norm() > region_radius * (1.0 + 1e-9)) {
      std::vector<double> trace;
      for (const auto& s : rep.samples) trace.push_back(s.W);
      throw DivergenceError("run_model_flow: orbit left the verified neighbourhood at tau = " +
                                std::to_string(tau),
                            trace);
    }
    rep.samples.push_back(std::move(smp));
  };

  ode::Options opts;
  opts.rtol = options.rtol;
  opts.atol = options.atol;
  RVector y(dim + 2);
  y.head(dim) = x0;
  y(dim) = 0.0;
  y(dim + 1) = 0.0;
  emit(0.0, y);
  std::size_t next = 1;

  const double split = std::min(1.0, tau_max);
  for (const auto& [a, b] : {std::pair{0.0, split}, std::pair{split, tau_max}}) {
    if (b <= a) continue;
    weighted = a >= 1.0;
    ode::DormandPrince54 solver(rhs, opts);
    solver.initialize(a, y, 1.0);
    try {
      while (solver.t() < b) {
        solver.step(b);
        while (next < grid.size() && grid[next] <= solver.t()) {
          const double tg = grid[next++];
          emit(tg, tg == solver.t() ? solver.y() : solver.dense(tg));
        }
      }
    } catch (const IntegrationError& e) {
      std::vector<double> trace;
      for (const auto& s : rep.samples) trace.push_back(s.W);
      throw DivergenceError(std::string("run_model_flow: ") + e.what(), trace);
    }
    y = solver.y();
  }

  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    rep.violation_max = i == 0 ? s.W - s.bound : std::max(rep.violation_max, s.W - s.bound);
    if (i > 0) rep.max_increase = std::max(rep.max_increase, s.W - rep.samples[i - 1].W);
  }
  rep.monotone = rep.max_increase <= 1e-12 * W0;
  return rep;
}

double decay_tail_factor(double epsilon) {
  if (!(epsilon > 0.0)) throw PreconditionError("decay_tail_factor: eps must be positive");
  // tau = e^u turns the algebraic tail into e^{-eps u} on [0, inf).
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([epsilon](double u) { return std::exp(-epsilon * u); }, 0.0,
                              std::numeric_limits<double>::infinity());
}

ArclengthCertificate arclength_certificate(const DecayReport& report, double cauchy_tol) {
  const double eps = report.epsilon;
  if (!(eps > 0.0)) throw PreconditionError("arclength_certificate: needs eps > 0 (alpha < 2)");
  if (report.samples.empty()) throw PreconditionError("arclength_certificate: empty report");
  if (report.tau_max < 1.0) throw PreconditionError("arclength_certificate: needs tau_max >= 1");

  ArclengthCertificate cert;
  const auto& last = report.samples.back();
  cert.measured = last.arclength;
  const double T = last.tau;

  // int_T^inf bound(tau) tau^eps, with tau = T e^u, evaluated in log space
  // so that the integrand stays finite for large u.
  boost::math::quadrature::exp_sinh<double> integrator;
  const double p = 1.0 / (report.alpha - 1.0);
  const double beyond = integrator.integrate(
      [&](double u) {
        const double log_tau = std::log(T) + u;
        const double log_base = log_tau + std::log(report.lambda + std::exp(-log_tau));
        return report.W0 * std::exp((1.0 + eps) * log_tau - p * log_base);
      },
      0.0, std::numeric_limits<double>::infinity());

  auto at_one = std::find_if(report.samples.begin(), report.samples.end(),
                             [](const DecaySample& s) { return s.tau == 1.0; });
  if (at_one == report.samples.end()) throw PreconditionError("arclength_certificate: no sample at tau = 1");
  const double w1 = at_one->W;
  const double scale = (report.k + report.c) / std::sqrt(report.k2);

  cert.decay_factor = decay_tail_factor(eps);
  cert.head_term = std::sqrt(std::max(0.0, report.W0 - w1));
  cert.weighted_tail = w1 + (1.0 + eps) * (last.weighted_integral + beyond);
  cert.tail_bound =
      scale * (cert.head_term + std::sqrt(cert.weighted_tail) * std::sqrt(cert.decay_factor));
  cert.finite = std::isfinite(cert.tail_bound);

  // Remaining arclength after tau1 >= 1 is bounded by
  // scale * sqrt(W(tau1) tau1^{1+eps} + (1+eps) int_{tau1}^inf W tau^eps) * sqrt(tau1^{-eps}/eps).
  for (const auto& s : report.samples) {
    if (s.tau < 1.0) continue;
    const double weighted = last.weighted_integral - s.weighted_integral + beyond;
    const double remaining =
        scale * std::sqrt(s.W * std::pow(s.tau, 1.0 + eps) + (1.0 + eps) * weighted) *
        std::sqrt(std::pow(s.tau, -eps) / eps);
    if (remaining < cauchy_tol) {
      cert.cauchy_reached = true;
      cert.cauchy_time = s.tau;
      cert.cauchy_sup = last.arclength - s.arclength;
      break;
    }
  }
  return cert;
}

}  // namespace cspin
