#include <benchmark/benchmark.h>

#include "collision_spin/central_config.hpp"
#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/gradient_flow.hpp"
#include "collision_spin/presets.hpp"
#include "collision_spin/shape_geometry.hpp"
#include "collision_spin/spin_demo.hpp"

using namespace cspin;

static void BM_FSMetric(benchmark::State& state) {
  CVector s = CVector::Constant(state.range(0), Complex(0.3, -0.2));
  for (auto _ : state) benchmark::DoNotOptimize(FSMetric(s).matrix().data());
}
BENCHMARK(BM_FSMetric)->Arg(1)->Arg(3)->Arg(8);

static void BM_BlownupField(benchmark::State& state) {
  const std::vector<double> m(static_cast<std::size_t>(state.range(0)), 1.0);
  const MassSystem mass(m);
  BlownUpState st;
  st.r = 0.1;
  st.v = -2.0;
  st.s = CVector::Constant(mass.shape_dim(), Complex(0.2, 0.4));
  st.w = CVector::Constant(mass.shape_dim(), Complex(0.01, 0.02));
  for (auto _ : state) benchmark::DoNotOptimize(blownup_vector_field(mass, st, -1.0).v);
}
BENCHMARK(BM_BlownupField)->Arg(3)->Arg(5)->Arg(10);

static void BM_Multistart(benchmark::State& state) {
  const MassSystem mass({1.0, 1.0, 1.0});
  MultistartOptions opt;
  opt.seed = 7;
  opt.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multistart_cc(mass, opt).size());
}
BENCHMARK(BM_Multistart)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_PerturbedOrbit(benchmark::State& state) {
  const CollisionPreset p = near_homothetic_perturbed();
  IntegrationControls ctl;
  ctl.t_end = 30.0;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_blownup(p.mass, p.initial, p.h, ctl).arclength);
}
BENCHMARK(BM_PerturbedOrbit)->Unit(benchmark::kMillisecond);

static void BM_SpiralLift(benchmark::State& state) {
  const ShapeCurve sp = spiral_curve(1.0, 1e4);
  for (auto _ : state) benchmark::DoNotOptimize(horizontal_lift(sp, 0.0).max_abs_err);
}
BENCHMARK(BM_SpiralLift)->Unit(benchmark::kMillisecond);

static void BM_QuarticFlow(benchmark::State& state) {
  ModelFlow f;
  f.W = quartic_potential();
  f.loj_constant = 16.0;
  RVector x0(2);
  x0 << 0.3, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(run_model_flow(f, x0, 1e3).violation_max);
}
BENCHMARK(BM_QuarticFlow)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
