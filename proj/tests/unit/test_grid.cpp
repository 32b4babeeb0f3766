#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "impulse/discount.hpp"
#include "impulse/grid.hpp"

using namespace impulse;

namespace {

std::shared_ptr<const Grid> triangle(std::size_t n) {
  return std::make_shared<const Grid>(std::vector<Grid::Axis>{{0, 10, n}, {0, 10, n}},
                                      [](const State& x) { return x[0] + x[1] <= 10.0 + 1e-9; });
}

}  // namespace

TEST(Grid, GeometryAndIndexing) {
  const auto g = triangle(11);
  EXPECT_EQ(g->size(), 121u);
  EXPECT_EQ(g->masked_count(), 66u);  // 11 + 10 + ... + 1
  EXPECT_DOUBLE_EQ(g->spacing(0), 1.0);
  const std::size_t node = g->flat_index({3, 4});
  EXPECT_EQ(g->multi_index(node), (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(g->point(node), (State{3, 4}));
  EXPECT_EQ(g->nearest(State{3.2, 3.7}), node);
  EXPECT_EQ(g->nearest(State{-5, 40}), g->flat_index({0, 10}));
  EXPECT_EQ(g->point(g->flat_index({10, 0})), (State{10, 0}));
}

TEST(Grid, RejectsDegenerateAxes) {
  EXPECT_THROW(Grid({{0, 1, 1}}), ConfigError);
  EXPECT_THROW(Grid({{1, 0, 5}}), ConfigError);
}

TEST(Grid, InterpolationExactForLinearDataAcrossTheBoundary) {
  const auto g = triangle(11);
  std::vector<double> v(g->size(), 0.0);
  auto lin = [](const State& x) { return 2.0 * x[0] - 0.5 * x[1] + 1.0; };
  for (std::size_t node : g->masked()) v[node] = lin(g->point(node));
  g->fill_outside(v);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const State x{u(rng), u(rng)};
    if (x[0] + x[1] > 10.0) continue;
    EXPECT_NEAR(g->interpolate(v, x), lin(x), 1e-12) << to_string(x);
  }
}

TEST(Grid, InterpolationClampsToTheBox) {
  const Grid g({{0, 1, 3}});
  const std::vector<double> v{1.0, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(g.interpolate(v, State{0.25}), 1.5);
  EXPECT_DOUBLE_EQ(g.interpolate(v, State{-3.0}), 1.0);
  EXPECT_DOUBLE_EQ(g.interpolate(v, State{9.0}), 4.0);
}

TEST(ValueField, AssignRejectsNonFinite) {
  auto f = ValueField::zeros(triangle(5));
  std::vector<double> v(f.grid().size(), 1.0);
  v[f.grid().masked().front()] = NAN;
  EXPECT_THROW(f.assign(v), Error);
}

TEST(ValueField, SliceEmbeddingAppliesTheDiscountFactor) {
  const auto g = std::make_shared<const Grid>(std::vector<Grid::Axis>{{0, 1, 5}});
  std::vector<double> v{1, 2, 3, 4, 5};
  const ValueField f(g, v, discount::time_slice(0.5, 1));
  EXPECT_NEAR(f(State{0.5, 0.0}), 3.0, 1e-15);
  EXPECT_NEAR(f(State{0.5, 2.0}), 3.0 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(f.node_state(2), (State{0.5, 0.0}));
  EXPECT_NEAR(as_value_fn(f)(State{0.25, 0.0}), 2.0, 1e-15);
}
