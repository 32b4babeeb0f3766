#include <gtest/gtest.h>

#include <cmath>

#include "impulse/discount.hpp"
#include "impulse/sir.hpp"
#include "impulse/verify.hpp"
#include "oracles.hpp"

using namespace impulse;

namespace {

std::shared_ptr<const Grid> unit_grid(std::size_t n) {
  return std::make_shared<const Grid>(std::vector<Grid::Axis>{{0, 1, n}});
}

QuadratureConfig quad(double alpha) {
  QuadratureConfig q;
  q.horizon = std::min(80.0, 40.0 / alpha);
  return q;
}

}  // namespace

TEST(Wrap, CostsAgreeAtZeroAndScaleWithTime) {
  const auto b = discount::maintenance_model(1.0, 2.0, 0.3);
  const auto dm = discount::wrap_discounted(b.model, b.flow, 0.5);
  EXPECT_TRUE(dm.warnings.empty());
  const State y{0.4};
  EXPECT_DOUBLE_EQ(dm.model.gradual_cost(State{0.4, 0.0}), b.model.gradual_cost(y));
  EXPECT_DOUBLE_EQ(dm.model.impulse_cost(State{0.4, 0.0}, Action{0}), 0.3);
  EXPECT_NEAR(dm.model.gradual_cost(State{0.4, 2.0}), std::exp(-1.0) * 0.8, 1e-15);
  EXPECT_EQ(dm.model.jump(State{0.4, 3.0}, Action{0}), (State{0.0, 3.0}));
  const State z = dm.flow.advance(State{0.4, 1.0}, 2.0);
  EXPECT_NEAR(z[0], b.flow.advance(y, 2.0)[0], 1e-15);
  EXPECT_DOUBLE_EQ(z[1], 3.0);
}

TEST(Wrap, RejectsNonPositiveAlphaAndWarnsOnGrowingCost) {
  const auto b = discount::constant_cost_model(2.0, 1.0);
  EXPECT_THROW(discount::wrap_discounted(b.model, b.flow, 0.0), ConfigError);
  ImpulseModel grow = b.model;
  const FlowSpec up = FlowSpec::closed_form([](const State& y, double t) { return State{y[0] + t}; });
  grow.bounds.upper = State{10.0};
  grow.gradual_cost = [](const State& y) { return y[0] * y[0]; };
  EXPECT_FALSE(discount::wrap_discounted(grow, up, 0.5).warnings.empty());
}

TEST(ConstantCost, FixedPointIsKOverAlpha) {
  for (double alpha : {0.5, 100.0}) {
    const auto b = discount::constant_cost_model(2.0, 1.0);
    const auto dm = discount::wrap_discounted(b.model, b.flow, alpha);
    SolveOptions opts;
    opts.tol = 1e-8;
    const SolveResult r = discount::solve_wrapped(dm, unit_grid(5), {}, quad(alpha), opts);
    for (double v : r.field.values()) EXPECT_NEAR(v, 2.0 / alpha, 1e-6);
  }
}

TEST(ConstantCost, GeneratorVanishesAtTheFixedPoint) {
  const auto b = discount::constant_cost_model(2.0, 1.0);
  const ValueFn V = [](const State&) { return 4.0; };
  const auto g = discount::discounted_forward_generator(V, b.flow, b.model, 0.5, State{0.3}, {}, {});
  ASSERT_TRUE(g);
  EXPECT_NEAR(*g, 0.0, 1e-6);
}

TEST(Generator, AlphaZeroIsTheUndiscountedGenerator) {
  const auto b = discount::maintenance_model(1.0, 1.0, 0.3);
  const ValueFn V = [](const State& y) { return y[0] * y[0]; };
  const auto a = discount::discounted_forward_generator(V, b.flow, b.model, 0.0, State{0.3}, {}, {});
  const auto c = forward_generator(V, b.flow, b.model, State{0.3}, {}, {});
  ASSERT_TRUE(a && c);
  EXPECT_EQ(*a, *c);
}

TEST(Maintenance, WrappedAndDirectSolvesAgreeWithTheRenewalOracle) {
  const double r = 1.0, w = 1.0, K = 0.3, alpha = 0.5;
  const auto b = discount::maintenance_model(r, w, K);
  const auto dm = discount::wrap_discounted(b.model, b.flow, alpha);
  const auto grid = unit_grid(51);
  SolveOptions opts;
  const SolveResult wrapped = discount::solve_wrapped(dm, grid, {}, quad(alpha), opts);
  const SolveResult direct =
      discount::discounted_value_iteration(b.model, b.flow, alpha, grid, {}, quad(alpha), opts);
  for (std::size_t node : grid->masked()) {
    const double y = grid->point(node)[0];
    EXPECT_NEAR(wrapped.field.values()[node], direct.field.values()[node], 5 * opts.tol);
    // Geometric convergence leaves a gap of about tol * rho / (1 - rho).
    EXPECT_NEAR(direct.field.values()[node], oracle::maintenance_value(r, w, K, alpha, y), 2e-3);
    EXPECT_LE(direct.field.values()[node], w / alpha + 1e-12);
    EXPECT_GE(direct.field.values()[node], 0.0);
  }
  // V((y, s)) = exp(-alpha s) V_Y(y).
  EXPECT_NEAR(wrapped.field(State{0.4, 2.0}), std::exp(-1.0) * wrapped.field(State{0.4, 0.0}), 1e-12);
}
