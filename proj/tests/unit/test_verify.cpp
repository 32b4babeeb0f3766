#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "impulse/bellman.hpp"
#include "impulse/csv.hpp"
#include "impulse/sir.hpp"
#include "impulse/verify.hpp"
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
  ValueFn analytic() const {
    return [p = p](const State& x) { return sir::analytic_value(p, x); };
  }
};

std::shared_ptr<const Grid> triangle(double N, std::size_t n) {
  return std::make_shared<const Grid>(std::vector<Grid::Axis>{{0, N, n}, {0, N, n}},
                                      [N](const State& x) { return x[0] + x[1] <= N * (1 + 1e-12); });
}

GeneratorConfig gen() { return GeneratorConfig{}; }

}  // namespace

TEST(ForwardGenerator, VanishesOffL) {
  const SirCase s(params(5, 4, 3));
  const auto f = forward_generator(s.analytic(), s.flow, s.model, State{4, 3}, gen(), s.q);
  ASSERT_TRUE(f);
  EXPECT_NEAR(*f, 0.0, 1e-3);
}

TEST(ForwardGenerator, StoppingValueAsV) {
  const SirCase s(params(5, 3, 4));
  const ValueFn stop = [&](const State& x) { return stopping_value(s.flow, s.model, x, s.q); };
  for (const State& x : {State{2, 2}, State{6, 1}}) {
    const auto f = forward_generator(stop, s.flow, s.model, x, gen(), s.q);
    ASSERT_TRUE(f);
    EXPECT_NEAR(*f, 0.0, 1e-3);
  }
}

TEST(ForwardGenerator, MatchesSmoothFormula) {
  // C^g + grad V . f with a central-difference gradient.
  const SirCase s(params(5, 3, 4));
  const ValueFn V = s.analytic();
  for (const State& x : {State{2, 2}, State{6, 1}, State{3, 6}}) {
    const double d = 1e-6;
    const State fx = sir::sir_field(s.p, x);
    const double gx = (V(State{x[0] + d, x[1]}) - V(State{x[0] - d, x[1]})) / (2 * d);
    const double gy = (V(State{x[0], x[1] + d}) - V(State{x[0], x[1] - d})) / (2 * d);
    const double smooth = sir::gradual_cost(s.p, x) + gx * fx[0] + gy * fx[1];
    const auto f = forward_generator(V, s.flow, s.model, x, gen(), s.q);
    ASSERT_TRUE(f);
    EXPECT_NEAR(*f, smooth, 1e-3);
  }
}

TEST(ForwardGenerator, DiscountedFormOnLinearFlow) {
  // y' = -y, C^g = y, V = y^2: -alpha V + C^g + V' f = -alpha y^2 + y - 2 y^2.
  ImpulseModel m;
  m.gradual_cost = [](const State& y) { return y[0]; };
  m.bounds.lower = State{0.0};
  m.bounds.upper = State{2.0};
  const FlowSpec f =
      FlowSpec::closed_form([](const State& y, double t) { return State{y[0] * std::exp(-t)}; });
  const ValueFn V = [](const State& y) { return y[0] * y[0]; };
  QuadratureConfig q;
  const double y = 0.7;
  const double alpha = 0.3;
  const auto g = forward_generator(V, f, m, State{y}, gen(), q, alpha);
  ASSERT_TRUE(g);
  EXPECT_NEAR(*g, -alpha * y * y + y - 2 * y * y, 1e-3);
}

TEST(BackwardGenerator, SeventyFiveElevenths) {
  const SirCase s(params(5, 4, 3, 12));
  const GeneratorEstimate e = backward_generator(s.analytic(), s.flow, s.model, State{10, 1}, gen(), s.q);
  ASSERT_TRUE(e.backward);
  EXPECT_FALSE(e.singular);
  EXPECT_NEAR(*e.backward, 75.0 / 11.0, 1e-2);
  EXPECT_NEAR(oracle::sir_generator_on_impulse_region({4, 3, 5}, 10, 1), 75.0 / 11.0, 1e-12);
}

TEST(BackwardGenerator, SingularWhenNoIncomingTrajectory) {
  // On the edge x1 + x2 = N of the supercritical triangle the flow comes
  // from outside X.
  const SirCase s(params(5, 4, 3));
  const GeneratorEstimate e = backward_generator(s.analytic(), s.flow, s.model, State{9, 1}, gen(), s.q);
  EXPECT_TRUE(e.singular);
  EXPECT_FALSE(e.backward);
}

TEST(ImpulseGap, OnAndOffL) {
  const SirCase s(params(5, 4, 3));
  EXPECT_NEAR(impulse_gap(s.model, s.analytic(), State{8, 1}), 0.0, 1e-12);
  EXPECT_NEAR(impulse_gap(s.model, s.analytic(), State{4, 3}), 15.0 - 4.0, 1e-12);
}

TEST(InterventionSet, AnalyticShapes) {
  const auto grid = triangle(10, 41);
  const double h = grid->spacing(0);
  struct Case {
    sir::SirParams p;
    double slope;  // < 0: only the cemetery row
  };
  for (const Case& c : {Case{params(5, 4, 3), 0.2}, Case{params(5, 3, 4), -1.0},
                        Case{params(1.5, 3, 4), 0.25}}) {
    const SirCase s(c.p);
    const auto L = intervention_set(s.model, s.analytic(), *grid, 1e-6);
    for (std::size_t node : grid->masked()) {
      const State x = grid->point(node);
      if (c.slope < 0) {
        EXPECT_EQ(L[node] != 0, x[1] == 0.0) << to_string(x);
      } else if (std::abs(x[1] - c.slope * x[0]) > h) {
        EXPECT_EQ(L[node] != 0, x[1] < c.slope * x[0]) << to_string(x);
      }
    }
  }
}

TEST(DifferentialForm, AnalyticHasNoViolations) {
  const auto grid = triangle(10, 41);
  for (const auto& p : {params(5, 4, 3), params(5, 4, 4), params(5, 3, 4), params(1.5, 3, 4)}) {
    const SirCase s(p);
    const DifEqReport r = check_differential_form(s.analytic(), s.flow, s.model, *grid, {}, s.q);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_GT(r.case_a, 0u);
    // With only the bottom row in L, the whole set sits in the exclusion band.
    if (sir::classify(p).threshold_slope) EXPECT_GT(r.case_b, 0u);
    EXPECT_LE(r.worst_forward, 1e-3);
    EXPECT_GE(r.min_backward, -1e-3);
  }
}

TEST(DifferentialForm, CemeteryRowIsCaseB) {
  const SirCase s(params(5, 4, 3));
  const DifEqVerdict v = classify_point(s.analytic(), s.flow, s.model, State{5, 0}, {}, s.q);
  EXPECT_EQ(v.kase, DifEqCase::kB);
  EXPECT_EQ(v.impulse_gap, 0.0);
}

TEST(DifferentialForm, PerturbedPatchIsFlagged) {
  const SirCase s(params(5, 4, 3));
  const auto grid = triangle(10, 41);
  const ValueFn base = s.analytic();
  const ValueFn bumped = [base](const State& x) {
    const bool patch = x[0] >= 2.0 && x[0] <= 3.0 && x[1] >= 4.0 && x[1] <= 5.0;
    return base(x) + (patch ? 0.1 : 0.0);
  };
  const DifEqReport r = check_differential_form(bumped, s.flow, s.model, *grid, {}, s.q);
  EXPECT_GT(r.violations, 0u);
  std::size_t in_patch = 0;
  for (const auto& v : r.verdicts) {
    if (v.kase != DifEqCase::kViolation) continue;
    EXPECT_TRUE(v.location[0] >= 1.9 && v.location[0] <= 3.1 && v.location[1] >= 3.9 &&
                v.location[1] <= 5.1)
        << to_string(v.location);
    ++in_patch;
  }
  EXPECT_GT(in_patch, 0u);
}

TEST(ExclusionBand, MarksCellsAroundTheLBoundary) {
  const Grid g({{0, 10, 11}});
  std::vector<char> L(11, 0);
  for (int i = 0; i <= 4; ++i) L[i] = 1;
  const auto band = exclusion_band(g, L, 2);
  const std::vector<char> expect{0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  EXPECT_EQ(band, expect);
}

TEST(NoImpulseIdentity, Examples) {
  const SirCase s(params(5, 4, 3));
  EXPECT_LE(check_no_impulse_identity(s.analytic(), s.flow, s.model, State{2, 3}, 1.0, s.q), 1e-6);
  EXPECT_EQ(check_no_impulse_identity(s.analytic(), s.flow, s.model, State{2, 3}, 0.0, s.q), 0.0);
  const State end = advance(s.flow, State{2, 3}, 1.0);
  const ValueFn base = s.analytic();
  const ValueFn shifted = [&](const State& x) { return base(x) + (x == end ? 0.01 : 0.0); };
  EXPECT_NEAR(check_no_impulse_identity(shifted, s.flow, s.model, State{2, 3}, 1.0, s.q), 0.01, 1e-6);
}

TEST(NoImpulseIdentity, RandomOffLTrajectories) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& p : {params(5, 4, 3), params(5, 3, 4), params(1.5, 3, 4)}) {
    const SirCase s(p);
    const auto reg = sir::classify(p);
    int done = 0;
    while (done < 100) {
      const double x1 = 0.2 + 9.0 * u(rng);
      const State x{x1, (10.0 - x1) * u(rng)};
      if (x[1] <= 0.05) continue;
      double t = 2.0 * u(rng);
      if (reg.tag == sir::RegimeTag::kSupercritical) {
        if (x[1] <= 0.2 * x[0]) continue;  // above the line stays above
      } else if (reg.tag == sir::RegimeTag::kSubcriticalCheap) {
        const auto hit = sir::line_hitting_time(p, x);
        if (!hit || *hit <= 0.0) continue;
        t = std::min(t, *hit);
      }
      EXPECT_LE(check_no_impulse_identity(s.analytic(), s.flow, s.model, x, t, s.q), 1e-6);
      ++done;
    }
  }
}

TEST(HMonotone, AnalyticZeroAndDownwardJump) {
  const SirCase s(params(1.5, 3, 4));
  const auto r = check_h_monotone(s.analytic(), s.flow, s.model, State{4, 4}, WaitTime::infinite(), 41,
                                  10.0, 1e-7, s.q);
  EXPECT_TRUE(r.ok);

  const ValueFn zero = [](const State&) { return 0.0; };
  EXPECT_TRUE(check_h_monotone(zero, s.flow, s.model, State{4, 4}, WaitTime::finite(2.0), 21, 10.0,
                               1e-9, s.q)
                  .ok);

  // Subtract a bump near phi(x, t/2).
  const State mid = advance(s.flow, State{4, 4}, 0.5);
  const ValueFn base = s.analytic();
  const ValueFn dip = [&](const State& x) {
    return base(x) - (max_norm(x - mid) < 0.1 ? 0.5 : 0.0);
  };
  EXPECT_FALSE(check_h_monotone(dip, s.flow, s.model, State{4, 4}, WaitTime::finite(1.0), 41, 10.0,
                                1e-7, s.q)
                   .ok);
}

TEST(Conditions, AnalyticPassesAndRemovableDiscontinuityFails) {
  for (const auto& p : {params(5, 4, 3), params(5, 3, 4), params(1.5, 3, 4)}) {
    const SirCase s(p);
    const std::vector<State> starts{State{6, 0.5}, State{3, 4}, State{5, 2}};
    const ConditionsReport r =
        check_conditions({s.model, s.flow, 0.0}, s.analytic(), starts, {}, {}, s.q);
    EXPECT_TRUE(r.ok()) << r.c6.pass << "/" << r.c6.total << " " << r.c7.pass << "/" << r.c7.total
                        << " " << r.c8.pass << "/" << r.c8.total << " " << r.c9.pass << "/"
                        << r.c9.total;
  }

  const SirCase s(params(5, 3, 4));
  ConditionsConfig cc;
  const State x{3, 4};
  // Pick a point exactly on the sampled trajectory and lift V there.
  const State hole =
      advance(s.flow, x, cc.horizon * (10.0 / static_cast<double>(cc.samples - 1)));
  const ValueFn base = s.analytic();
  const ValueFn lifted = [&](const State& y) { return base(y) + (y == hole ? 1.0 : 0.0); };
  const ConditionsReport bad = check_conditions({s.model, s.flow, 0.0}, lifted, {x}, {}, cc, s.q);
  EXPECT_FALSE(bad.c8.ok());
}

TEST(Conditions, ConstantValueWithoutCost) {
  ImpulseModel m;
  m.gradual_cost = [](const State&) { return 0.0; };
  m.impulse_cost = [](const State&, Action) { return 1.0; };
  m.jump = [](const State& x, Action) { return x; };
  m.bounds.lower = State{0.0};
  m.bounds.upper = State{1.0};
  const FlowSpec f =
      FlowSpec::closed_form([](const State& y, double t) { return State{y[0] * std::exp(-t)}; });
  const ValueFn V = [](const State&) { return 0.0; };
  QuadratureConfig q;
  const ConditionsReport r = check_conditions({m, f, 0.0}, V, {State{0.5}, State{0.9}}, {}, {}, q);
  EXPECT_TRUE(r.ok());
}

TEST(Verdicts, CsvLayout) {
  const SirCase s(params(5, 4, 3));
  const auto grid = triangle(10, 11);
  const DifEqReport r = check_differential_form(s.analytic(), s.flow, s.model, *grid, {}, s.q);
  const auto dir = oracle::scratch_dir("verdicts");
  const std::string path = (dir / "v.csv").string();
  write_verdicts_csv(path, r, 2);
  const csv::Table t = csv::read(path);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x1", "x2", "case", "forward_residual", "impulse_gap"}));
  EXPECT_EQ(t.rows.size(), r.verdicts.size());
  std::filesystem::remove_all(dir);
}
