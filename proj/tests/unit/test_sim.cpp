#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "impulse/csv.hpp"
#include "impulse/sim.hpp"
#include "impulse/sir.hpp"
#include "oracles.hpp"

using namespace impulse;

namespace {

sir::SirParams params(double c, double beta, double gamma, double N = 10.0) {
  sir::SirParams p;
  p.c = c;
  p.beta = beta;
  p.gamma = gamma;
  p.N = N;
  return p;
}

struct SirCase {
  sir::SirParams p;
  ImpulseModel model;
  FlowSpec flow;
  QuadratureConfig q;
  explicit SirCase(const sir::SirParams& params)
      : p(params), model(sir::make_model(params)), flow(sir::make_flow(params)) {
    q.horizon = sir::default_horizon(params);
  }
};

double segment_and_impulse_total(const Trajectory& t) {
  double sum = 0.0;
  for (const auto& s : t.segments) sum += s.cost;
  for (const auto& e : t.impulses) sum += e.cost;
  return sum;
}

}  // namespace

TEST(Simulate, SupercriticalImpulseAtOnce) {
  const SirCase s(params(5, 4, 3, 12));
  const Trajectory t = simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{10, 1}, {}, s.q);
  ASSERT_EQ(t.impulses.size(), 1u);
  EXPECT_EQ(t.impulses[0].time, 0.0);
  EXPECT_EQ(t.impulses[0].post, (State{10, 0}));
  EXPECT_DOUBLE_EQ(t.impulses[0].cost, 5.0);
  EXPECT_EQ(t.terminated, Termination::kCemetery);
  EXPECT_DOUBLE_EQ(t.total_cost, 5.0);
}

TEST(Simulate, ExpensiveNeverIntervenes) {
  const SirCase s(params(5, 3, 4, 20));
  const Trajectory t = simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{8, 8}, {}, s.q);
  EXPECT_TRUE(t.impulses.empty());
  EXPECT_EQ(t.terminated, Termination::kStopped);
  EXPECT_NEAR(t.total_cost, 7.0, 1e-3);
}

TEST(Simulate, CheapWaitsThenImpulses) {
  const SirCase s(params(1.5, 3, 4));
  const Trajectory t = simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{4, 4}, {}, s.q);
  ASSERT_EQ(t.impulses.size(), 1u);
  EXPECT_NEAR(t.impulses[0].time, std::log(4.0), 1e-12);
  EXPECT_NEAR(t.total_cost, 3.38965, 1e-3);
  EXPECT_EQ(t.terminated, Termination::kCemetery);
}

TEST(Simulate, TrajectoryInvariants) {
  const SirCase s(params(1.5, 3, 4));
  const Trajectory t = simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{3, 6}, {}, s.q);
  EXPECT_NEAR(t.total_cost, segment_and_impulse_total(t), 1e-9);
  ASSERT_EQ(t.impulses.size(), 1u);
  const Segment& first = t.segments.front();
  EXPECT_LE(max_norm(first.points.back() - t.impulses[0].pre), 1e-12);
  EXPECT_EQ(t.impulses[0].post, apply_impulse(s.model, t.impulses[0].pre, t.impulses[0].action));
  EXPECT_GE(first.points.size(), 200u);
}

TEST(Simulate, ImpulseCapOnZeroWaitLoops) {
  // Jump to itself at positive cost: "impulse now" never ends.
  ImpulseModel m;
  m.gradual_cost = [](const State&) { return 0.0; };
  m.impulse_cost = [](const State&, Action) { return 1.0; };
  m.jump = [](const State& x, Action) { return x; };
  m.bounds.lower = State{0.0};
  m.bounds.upper = State{1.0};
  const FlowSpec f = FlowSpec::closed_form([](const State& x, double) { return x; });
  SimCaps caps;
  caps.max_impulses = 25;
  const Trajectory t = simulate(m, f, impulse_now_strategy(), State{0.5}, caps, {});
  EXPECT_EQ(t.terminated, Termination::kImpulseCap);
  EXPECT_EQ(t.impulses.size(), 25u);
  EXPECT_DOUBLE_EQ(t.total_cost, 25.0);
}

TEST(Simulate, HorizonEndsAFiniteWait) {
  const SirCase s(params(5, 3, 4));
  SimCaps caps;
  caps.horizon = 1.0;
  const Trajectory t = simulate(s.model, s.flow, fixed_delay_strategy(5.0), State{5, 3}, caps, s.q);
  EXPECT_EQ(t.terminated, Termination::kHorizon);
  EXPECT_NEAR(t.total_cost, running_cost(s.flow, s.model, State{5, 3}, 1.0, s.q), 1e-9);
}

TEST(Simulate, SplittingASegmentKeepsTheCost) {
  const SirCase s(params(5, 3, 4));
  const State x{5, 3};
  const double whole = running_cost(s.flow, s.model, x, 2.0, s.q);
  const double split = running_cost(s.flow, s.model, x, 0.7, s.q) +
                       running_cost(s.flow, s.model, advance(s.flow, x, 0.7), 1.3, s.q);
  EXPECT_NEAR(whole, split, 1e-9);
}

TEST(EvaluateStrategy, AnalyticMatchesValueOnRandomStates) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& p : {params(5, 4, 3), params(5, 3, 4), params(1.5, 3, 4)}) {
    const SirCase s(p);
    std::vector<State> xs;
    while (xs.size() < 20) {
      const State x{10 * u(rng), 10 * u(rng)};
      if (x[0] + x[1] <= 10) xs.push_back(x);
    }
    const auto costs = evaluate_strategy(s.model, s.flow, sir::analytic_optimal_strategy(p), xs, {}, s.q);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EXPECT_NEAR(costs[i], sir::analytic_value(p, xs[i]), 5e-3) << to_string(xs[i]);
    }
  }
}

TEST(EvaluateStrategy, StopAndImpulseNowBaselines) {
  const SirCase s(params(5, 4, 3));
  const std::vector<State> xs{State{6, 1}, State{2, 5}, State{4, 0.5}};
  const auto stop = evaluate_strategy(s.model, s.flow, stop_strategy(), xs, {}, s.q);
  const auto now = evaluate_strategy(s.model, s.flow, impulse_now_strategy(), xs, {}, s.q);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_NEAR(stop[i], stopping_value(s.flow, s.model, xs[i], s.q), 1e-9);
    EXPECT_DOUBLE_EQ(now[i], 5.0 * xs[i][1]);
    EXPECT_GE(now[i], sir::analytic_value(s.p, xs[i]) - 1e-12);
  }
}

TEST(TrajectoryCsv, ImpulsePairsAndDeterminism) {
  const SirCase s(params(1.5, 3, 4));
  const Trajectory t = simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{4, 4}, {}, s.q);
  const auto dir = oracle::scratch_dir("traj");
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  write_trajectory_csv(a, t, 2);
  write_trajectory_csv(b, simulate(s.model, s.flow, sir::analytic_optimal_strategy(s.p), State{4, 4}, {}, s.q), 2);
  const csv::Table ta = csv::read(a);
  const csv::Table tb = csv::read(b);
  EXPECT_EQ(ta.rows, tb.rows);
  EXPECT_EQ(ta.header, (std::vector<std::string>{"t", "x1", "x2", "phase"}));
  std::size_t impulses = 0;
  for (std::size_t i = 0; i < ta.rows.size(); ++i) {
    if (ta.rows[i][3] != "impulse") continue;
    ++impulses;
  }
  EXPECT_EQ(impulses, 2u);
  std::filesystem::remove_all(dir);
}
