#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "collision_spin/errors.hpp"
#include "collision_spin/presets.hpp"
#include "collision_spin/shape_geometry.hpp"

namespace cspin::cli {

namespace {

using nlohmann::json;

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Empty path or "-" writes to the fallback stream.
void emit(const std::string& path, const std::string& content, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << content;
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path);
  os << content;
  if (!os) throw ConfigError("write failed: " + path);
}

json complex_array(const CVector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({v(k).real(), v(k).imag()});
  return out;
}

json complex_value(const Complex& c) { return {c.real(), c.imag()}; }

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

struct Options {
  // shared
  std::string masses = "1,1,1";
  std::string config;
  std::string output;
  std::string summary;
  int threads = 0;
  // cc-find / catalog
  int seed = 0;
  int starts = 64;
  double radius = 3.0;
  double cc_tol = 1e-12;
  // integrate
  std::string preset = "lagrange-homothetic";
  std::string initial;
  double h = std::nan("");
  double tau_max = 50.0;
  double tol = 1e-12;
  double capture_tol = 1e-10;
  double sample_interval = 0.05;
  // spin-demo
  double c = 1.0;
  double t_max = 1e4;
  int samples = 400;
  // grad-flow
  std::string potential = "quartic";
  std::string potential_file;
  double alpha = std::nan("");
  double k = 1.0;
  double gamma_c = 0.0;
  std::string x0 = "0.3,0.1";
  double loj_constant = std::nan("");
  std::string mode = "explicit";
};

int run_cc_find(const Options& o, std::ostream& out, bool detailed) {
  require_positive(o.cc_tol, "--tol");
  require_positive(o.radius, "--radius");
  if (o.starts < 1) throw ConfigError("--starts must be at least 1");
  const MassSystem mass = load_masses(o.masses, o.config);
  if (mass.shape_dim() < 1) throw ConfigError("central configurations need at least 3 bodies");
  MultistartOptions ms;
  ms.seed = o.seed;
  ms.starts = o.starts;
  ms.radius = o.radius;
  ms.threads = thread_budget(o.threads);
  ms.solver.tol = o.cc_tol;
  const auto catalog = multistart_cc(mass, ms);
  emit(o.output, detailed ? detailed_catalog_json(mass, catalog) : catalog_json(catalog), out);
  return 0;
}

BlownUpState parse_initial(const std::string& source, MassSystem& mass, double& h) {
  const std::string text = !source.empty() && source.front() == '{' ? source : read_file(source);
  try {
    const json doc = json::parse(text);
    mass = MassSystem(doc.at("masses").get<std::vector<double>>());
    auto cvec = [&](const char* key) {
      CVector v(mass.shape_dim());
      const auto& arr = doc.at(key);
      if (static_cast<int>(arr.size()) != mass.shape_dim()) {
        throw ConfigError(std::string(key) + " must have n-2 entries");
      }
      for (int i = 0; i < mass.shape_dim(); ++i) {
        v(i) = Complex(arr.at(i).at(0).get<double>(), arr.at(i).at(1).get<double>());
      }
      return v;
    };
    BlownUpState st;
    st.r = doc.at("r").get<double>();
    st.s = cvec("s");
    st.w = cvec("w");
    h = doc.value("h", -1.0);
    st.v = doc.contains("v") ? doc.at("v").get<double>()
                             : energy_consistent_v(mass, st.r, st.s, st.w, h);
    return st;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("initial state: ") + e.what());
  }
}

json spin_summary(const TrajectoryRecord& rec, const SpinReport& rep) {
  json j;
  j["termination"] = std::string(to_string(rec.termination));
  j["diagnostic"] = rec.diagnostic;
  j["theta"] = rec.theta;
  j["arclength"] = rec.arclength;
  j["energy_drift"] = rec.energy_drift;
  j["steps"] = rec.steps;
  j["capture_time"] = std::isfinite(rec.capture_time) ? json(rec.capture_time) : json(nullptr);
  j["theta_converged"] = rep.theta_converged;
  j["arclength_converged"] = rep.arclength_converged;
  j["divergence_flag"] = rep.divergence_flag;
  j["theta_final"] = rep.theta_final;
  j["arclength_final"] = rep.arclength_final;
  j["bound_holds"] = rep.bound_holds;
  j["decay_rate"] = std::isfinite(rep.decay_rate) ? json(rep.decay_rate) : json(nullptr);
  j["cauchy_time"] = std::isfinite(rep.cauchy_time) ? json(rep.cauchy_time) : json(nullptr);
  j["cauchy_sup"] = std::isfinite(rep.cauchy_sup) ? json(rep.cauchy_sup) : json(nullptr);
  return j;
}

int run_integrate(const Options& o, std::ostream& out) {
  require_positive(o.tau_max, "--tau-max");
  require_positive(o.tol, "--tol");
  require_positive(o.capture_tol, "--capture-tol");
  require_positive(o.sample_interval, "--sample-interval");

  if (o.initial.empty() && o.preset == "spiral-demo") {
    LiftOptions lo;
    lo.rtol = o.tol;
    const auto lift = horizontal_lift(spiral_preset(o.c, o.t_max), 0.0, lo);
    const auto rec = lift_to_record(lift);
    std::ostringstream os;
    write_trajectory_csv(rec, 1, os);
    emit(o.output, os.str(), out);
    if (!o.summary.empty()) emit(o.summary, spin_summary(rec, spin_and_arclength(rec)).dump(2) + "\n", out);
    return 0;
  }

  MassSystem mass({1.0, 1.0, 1.0});
  BlownUpState init;
  double h = -1.0;
  if (!o.initial.empty()) {
    init = parse_initial(o.initial, mass, h);
  } else {
    if (!is_collision_preset(o.preset)) throw ConfigError("unknown preset: " + o.preset);
    const CollisionPreset p = collision_preset(o.preset);
    mass = p.mass;
    init = p.initial;
    h = p.h;
  }
  if (!std::isnan(o.h)) {
    h = o.h;
    init.v = energy_consistent_v(mass, init.r, init.s, init.w, h, init.v > 0.0 ? 1.0 : -1.0);
  }

  IntegrationControls ctl;
  ctl.t_end = init.tau + o.tau_max;
  ctl.rtol = o.tol;
  ctl.atol = o.tol * 1e-3;
  ctl.capture_tol = o.capture_tol;
  ctl.sample_interval = o.sample_interval;
  const auto rec = integrate_blownup(mass, init, h, ctl);
  std::ostringstream os;
  write_trajectory_csv(rec, mass.shape_dim(), os);
  emit(o.output, os.str(), out);
  if (!o.summary.empty()) emit(o.summary, spin_summary(rec, spin_and_arclength(rec)).dump(2) + "\n", out);
  return 0;
}

int run_spin_demo(const Options& o, std::ostream& out) {
  if (!(o.c >= 0.0)) throw ConfigError("--c must be nonnegative");
  require_positive(o.tol, "--tol");
  if (!(o.t_max > 1.0 + 1e-6)) throw ConfigError("--t-max must exceed the start time 1+1e-6");
  if (o.samples < 2) throw ConfigError("--samples must be at least 2");
  LiftOptions lo;
  lo.rtol = o.tol;
  lo.atol = o.tol * 1e-2;
  lo.samples = o.samples;
  const auto lift = horizontal_lift(spiral_curve(o.c, o.t_max), 0.0, lo);
  std::ostringstream os;
  write_lift_csv(lift, os);
  emit(o.output, os.str(), out);
  if (!o.summary.empty()) {
    const auto cert = infinite_spin_certificate(lift, o.c, lo.divergence_threshold);
    json j;
    j["theta_final"] = lift.samples.back().theta;
    j["closed_form_final"] = lift.samples.back().closed_form;
    j["max_rel_err"] = lift.max_rel_err;
    j["max_J_residual"] = lift.max_J_residual;
    j["max_rotation_norm"] = lift.max_rotation_norm;
    j["fit_slope"] = cert.fit_slope;
    j["slope_ok"] = cert.slope_ok;
    j["inequality_holds"] = cert.inequality_holds;
    j["shape_arclength"] = cert.final_shape_arclength;
    j["diverges"] = cert.diverges;
    emit(o.summary, j.dump(2) + "\n", out);
  }
  return 0;
}

int run_grad_flow(const Options& o, std::ostream& out) {
  require_positive(o.tau_max, "--tau-max");
  Potential W;
  const std::vector<double> x = parse_list(o.x0);
  const int dim = static_cast<int>(x.size());
  if (o.potential == "quad") {
    W = quadratic_potential(dim);
  } else if (o.potential == "quartic") {
    W = quartic_potential(dim);
  } else if (o.potential == "flat") {
    W = flat_potential(dim);
  } else if (o.potential == "file") {
    if (o.potential_file.empty()) throw ConfigError("--potential file needs --file");
    W = polynomial_potential(read_file(o.potential_file));
  } else {
    throw ConfigError("unknown potential: " + o.potential);
  }
  ModelFlow flow;
  flow.W = W;
  flow.alpha = std::isnan(o.alpha) ? W.alpha : o.alpha;
  flow.k = o.k;
  flow.c = o.gamma_c;
  flow.loj_constant = std::isnan(o.loj_constant) ? W.loj_constant : o.loj_constant;
  if (o.gamma_c > 0.0) flow.gamma = orthogonal_perturbation(o.gamma_c);
  if (o.mode == "explicit") {
    flow.mode = NormalizationMode::explicit_constant;
  } else if (o.mode == "rescaled") {
    flow.mode = NormalizationMode::rescaled_potential;
  } else {
    throw ConfigError("--mode must be explicit or rescaled");
  }
  const RVector x0 = Eigen::Map<const RVector>(x.data(), dim);
  FlowOptions fo;
  fo.samples = o.samples;
  const auto report = run_model_flow(flow, x0, o.tau_max, fo);
  std::ostringstream os;
  write_decay_csv(report, dim, os);
  emit(o.output, os.str(), out);
  if (!o.summary.empty()) {
    json j;
    j["W0"] = report.W0;
    j["lambda"] = report.lambda;
    j["epsilon"] = report.epsilon;
    j["violation_max"] = report.violation_max;
    j["monotone"] = report.monotone;
    j["arclength"] = report.samples.back().arclength;
    if (o.tau_max >= 1.0) {
      const auto cert = arclength_certificate(report);
      j["certificate_finite"] = cert.finite;
      j["certificate_bound"] = cert.tail_bound;
    }
    emit(o.summary, j.dump(2) + "\n", out);
  }
  return 0;
}

void error_report(std::ostream& err, std::string_view kind, const std::string& message) {
  json j;
  j["error"] = std::string(kind);
  j["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int thread_budget(int requested) {
  int budget = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("COLLISION_SPIN_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) budget = std::min<long>(budget, cap);
  }
  if (requested > 0) budget = std::min(budget, requested);
  return budget;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number list: " + text);
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

MassSystem load_masses(const std::string& masses, const std::string& config) {
  try {
    if (!config.empty()) {
      return MassSystem::from_json(config.front() == '{' ? config : read_file(config));
    }
    return MassSystem(parse_list(masses));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
}

void write_trajectory_csv(const TrajectoryRecord& record, int shape_dim, std::ostream& os) {
  std::string line = "tau,r,v";
  for (int i = 1; i <= shape_dim; ++i) line += fmt::format(",s{0}_re,s{0}_im", i);
  for (int i = 1; i <= shape_dim; ++i) line += fmt::format(",w{0}_re,w{0}_im", i);
  line += ",theta,arclength,energy_residual\n";
  os << line;
  for (const auto& smp : record.samples) {
    line = num(smp.time) + "," + num(smp.r) + "," + num(smp.v);
    for (int i = 0; i < shape_dim; ++i) line += "," + num(smp.s(i).real()) + "," + num(smp.s(i).imag());
    for (int i = 0; i < shape_dim; ++i) line += "," + num(smp.w(i).real()) + "," + num(smp.w(i).imag());
    line += "," + num(smp.theta) + "," + num(smp.arclength) + "," + num(smp.energy_residual) + "\n";
    os << line;
  }
}

void write_lift_csv(const LiftResult& lift, std::ostream& os) {
  os << "t,re_s1,im_s1,theta,theta_closed_form,J_residual,rot_component_norm\n";
  for (const auto& smp : lift.samples) {
    os << num(smp.t) << ',' << num(smp.s(0).real()) << ',' << num(smp.s(0).imag()) << ','
       << num(smp.theta) << ',' << num(smp.closed_form) << ',' << num(smp.J_residual) << ','
       << num(smp.rotation_norm) << '\n';
  }
}

void write_decay_csv(const DecayReport& report, int dim, std::ostream& os) {
  std::string line = "tau";
  for (int i = 1; i <= dim; ++i) line += fmt::format(",x{}", i);
  line += ",W,bound,arclength\n";
  os << line;
  for (const auto& smp : report.samples) {
    line = num(smp.tau);
    for (int i = 0; i < dim; ++i) line += "," + num(smp.x(i));
    line += "," + num(smp.W) + "," + num(smp.bound) + "," + num(smp.arclength) + "\n";
    os << line;
  }
}

std::string catalog_json(const std::vector<CentralConfig>& catalog) {
  json arr = json::array();
  for (const auto& cc : catalog) {
    json e;
    e["s0"] = complex_array(cc.s0);
    e["V0"] = cc.V0;
    e["v0"] = cc.v0;
    e["spectrum"] = cc.hessian_spectrum;
    e["degenerate"] = cc.degenerate;
    e["morse_index"] = std::count_if(cc.hessian_spectrum.begin(), cc.hessian_spectrum.end(),
                                     [](double c) { return c < 0.0; });
    arr.push_back(std::move(e));
  }
  return arr.dump(2) + "\n";
}

std::string detailed_catalog_json(const MassSystem& mass, const std::vector<CentralConfig>& catalog) {
  json arr = json::array();
  for (const auto& cc : catalog) {
    const Classification cls = classify(mass, cc);
    json e;
    e["s0"] = complex_array(cc.s0);
    e["V0"] = cc.V0;
    e["v0"] = cc.v0;
    e["spectrum"] = cc.hessian_spectrum;
    e["degenerate"] = cc.degenerate;
    e["morse_index"] = cls.morse_index;
    e["residual"] = cc.residual;
    e["position_residual"] = cls.position_residual;
    e["near_zero_count"] = cls.near_zero_count;
    e["nonreal_unstable"] = cls.nonreal_unstable;
    e["lambda_plus_positive"] = cls.lambda_plus_positive;
    json rest = json::array();
    for (const auto& l : cls.restpoint_spectrum) rest.push_back(complex_value(l));
    e["restpoint_spectrum"] = rest;
    arr.push_back(std::move(e));
  }
  return arr.dump(2) + "\n";
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Planar n-body total collision laboratory", "collision-spin"};
  app.require_subcommand(1);

  auto add_masses = [&](CLI::App* sub) {
    sub->add_option("--masses", o.masses, "Comma-separated masses")->capture_default_str();
    sub->add_option("--config", o.config, "Mass system JSON {\"masses\": [..]}, inline or a file path");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("-o,--output", o.output, "Output path (default stdout)");
  };

  auto* cc = app.add_subcommand("cc-find", "Multistart search for central configurations (JSON)");
  auto* cat = app.add_subcommand("catalog", "Classified central-configuration catalog (JSON)");
  for (auto* sub : {cc, cat}) {
    add_masses(sub);
    add_output(sub);
    sub->add_option("--seed", o.seed, "Halton seed")->capture_default_str();
    sub->add_option("--starts", o.starts, "Number of starts")->capture_default_str();
    sub->add_option("--radius", o.radius, "Start ball radius in the chart")->capture_default_str();
    sub->add_option("--tol", o.cc_tol, "Residual tolerance |grad V|")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0: automatic)");
  }

  auto* integ = app.add_subcommand("integrate", "Integrate the blown-up equations (CSV)");
  integ->set_help_flag("--help", "Print this help message and exit");  // frees --h for the energy
  add_output(integ);
  integ->add_option("--preset", o.preset,
                    "lagrange-homothetic | euler-homothetic | near-homothetic-perturbed | spiral-demo")
      ->capture_default_str();
  integ->add_option("--initial", o.initial,
                    "Initial state JSON {masses, r, s, w, [v], [h]}, inline or a file path");
  integ->add_option("--h", o.h, "Energy (overrides the preset; v is recomputed)");
  integ->add_option("--tau-max", o.tau_max, "Blown-up time span")->capture_default_str();
  integ->add_option("--tol", o.tol, "Relative integration tolerance")->capture_default_str();
  integ->add_option("--capture-tol", o.capture_tol, "Restpoint capture tolerance")->capture_default_str();
  integ->add_option("--sample-interval", o.sample_interval, "Output spacing in tau")->capture_default_str();
  integ->add_option("--c", o.c, "Spiral rate for the spiral-demo preset")->capture_default_str();
  integ->add_option("--t-max", o.t_max, "End time for the spiral-demo preset")->capture_default_str();
  integ->add_option("--summary", o.summary, "Write a JSON spin/arclength summary here");

  auto* spin = app.add_subcommand("spin-demo", "Horizontal lift of the spiral shape curve (CSV)");
  add_output(spin);
  spin->add_option("--c", o.c, "Spiral rate")->capture_default_str();
  spin->add_option("--t-max", o.t_max, "End time")->capture_default_str();
  spin->add_option("--tol", o.tol, "Relative quadrature tolerance")->capture_default_str();
  spin->add_option("--samples", o.samples, "Number of log-spaced samples")->capture_default_str();
  spin->add_option("--summary", o.summary, "Write a JSON certificate summary here");

  auto* grad = app.add_subcommand("grad-flow", "Model gradient flow with the decay bound (CSV)");
  add_output(grad);
  grad->add_option("--potential", o.potential, "quad | quartic | flat | file")->capture_default_str();
  grad->add_option("--file", o.potential_file, "Polynomial potential JSON for --potential file");
  grad->add_option("--alpha", o.alpha, "Lojasiewicz exponent in (1,2)");
  grad->add_option("--k", o.k, "Drift constant k")->capture_default_str();
  grad->add_option("--c", o.gamma_c, "Orthogonal perturbation size c < k")->capture_default_str();
  grad->add_option("--x0", o.x0, "Initial point, comma separated")->capture_default_str();
  grad->add_option("--tau-max", o.tau_max, "Flow time")->capture_default_str();
  grad->add_option("--loj-constant", o.loj_constant, "C in |grad W|^2 >= C W^alpha");
  grad->add_option("--mode", o.mode, "explicit | rescaled")->capture_default_str();
  grad->add_option("--samples", o.samples, "Number of log-spaced samples")->capture_default_str();
  grad->add_option("--summary", o.summary, "Write a JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_report(err, "usage", e.what());
    return 2;
  }

  try {
    if (cc->parsed()) return run_cc_find(o, out, false);
    if (cat->parsed()) return run_cc_find(o, out, true);
    if (integ->parsed()) return run_integrate(o, out);
    if (spin->parsed()) return run_spin_demo(o, out);
    if (grad->parsed()) return run_grad_flow(o, out);
  } catch (const ConfigError& e) {
    error_report(err, e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    error_report(err, e.kind(), e.what());
    return 1;
  }
  error_report(err, "usage", "no subcommand");
  return 2;
}

}  // namespace cspin::cli
