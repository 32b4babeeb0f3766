#include <benchmark/benchmark.h>

#include <memory>

#include "impulse/bellman.hpp"
#include "impulse/sir.hpp"
#include "impulse/verify.hpp"

using namespace impulse;

namespace {

struct Fixture {
  sir::SirParams p;
  ImpulseModel model = sir::make_model(p);
  FlowSpec flow = sir::make_flow(p);
  QuadratureConfig q;
  Fixture() { q.horizon = sir::default_horizon(p); }
  BellmanProblem problem() const { return BellmanProblem{model, flow, 0.0}; }
};

std::shared_ptr<const Grid> triangle(std::size_t n) {
  return std::make_shared<const Grid>(std::vector<Grid::Axis>{{0, 10, n}, {0, 10, n}},
                                      [](const State& x) { return x[0] + x[1] <= 10 * (1 + 1e-12); });
}

void BM_ClosedFormFlow(benchmark::State& st) {
  const Fixture f;
  const State x{6, 2};
  double t = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(advance(f.flow, x, t));
    t += 1e-9;
  }
}
BENCHMARK(BM_ClosedFormFlow);

void BM_OdeFlow(benchmark::State& st) {
  const Fixture f;
  const FlowSpec ode = sir::make_ode_flow(f.p);
  for (auto _ : st) benchmark::DoNotOptimize(advance(ode, State{6, 2}, 1.0));
}
BENCHMARK(BM_OdeFlow);

void BM_Backup(benchmark::State& st) {
  const Fixture f;
  const ValueFn V = [p = f.p](const State& x) { return sir::analytic_value(p, x); };
  const ThetaSearchConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(bellman_backup(f.problem(), V, State{4, 3}, cfg, f.q));
}
BENCHMARK(BM_Backup);

void BM_ValueIteration(benchmark::State& st) {
  const Fixture f;
  const auto grid = triangle(static_cast<std::size_t>(st.range(0)));
  SolveOptions opts;
  for (auto _ : st) benchmark::DoNotOptimize(value_iteration(f.problem(), grid, {}, f.q, opts));
  st.counters["nodes"] = static_cast<double>(grid->masked_count());
}
BENCHMARK(BM_ValueIteration)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_Generator(benchmark::State& st) {
  const Fixture f;
  const ValueFn V = [p = f.p](const State& x) { return sir::analytic_value(p, x); };
  for (auto _ : st) benchmark::DoNotOptimize(generator_estimate(V, f.flow, f.model, State{4, 3}, {}, f.q));
}
BENCHMARK(BM_Generator);

}  // namespace
BENCHMARK_MAIN();
