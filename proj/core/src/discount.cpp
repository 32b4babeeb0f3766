#include "impulse/discount.hpp"

#include <cmath>
#include <limits>

namespace impulse::discount {

namespace {

State head(const State& x, std::size_t d) { return State(x.coords().first(d)); }

State append(const State& y, double s) {
  State x = State::zeros(y.dim() + 1);
  for (std::size_t k = 0; k < y.dim(); ++k) x[k] = y[k];
  x[y.dim()] = s;
  return x;
}

}  // namespace

DiscountedModel wrap_discounted(const ImpulseModel& base, const FlowSpec& base_flow, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("discount.alpha must be > 0");
  const std::size_t d = base.dim();
  if (d + 1 > State::kMaxDim) throw ConfigError("discounted wrap needs dim(Y) < " + std::to_string(State::kMaxDim));

  DiscountedModel dm{base, base_flow, alpha, {}, FlowSpec::closed_form({}), {}};

  // Sampled boundedness of C^g_Y on the lattice and along the flow from it.
  double sup_start = 0.0;
  double sup_later = 0.0;
  for (const State& y : lattice_samples(base, 9)) {
    const double c0 = std::abs(base.gradual_cost(y));
    if (!std::isfinite(c0)) {
      dm.warnings.push_back("C^g_Y is not finite at " + to_string(y));
      continue;
    }
    sup_start = std::max(sup_start, c0);
    for (double t : {1.0, 10.0, 100.0}) {
      try {
        sup_later = std::max(sup_later, std::abs(base.gradual_cost(base_flow.advance(y, t))));
      } catch (const DomainError&) {
      }
    }
  }
  if (!std::isfinite(sup_later) || sup_later > 10.0 * (1.0 + sup_start)) {
    dm.warnings.push_back("C^g_Y appears unbounded along the flow; the bound K/alpha may fail");
  }

  ImpulseModel& m = dm.model;
  m.name = base.name + "+discount";
  m.action_count = base.action_count;
  m.impulse_cost_floor = std::nullopt;  // exp(-alpha s) C^I has no positive floor
  m.gradual_cost = [g = base.gradual_cost, d, alpha](const State& x) {
    return std::exp(-alpha * x[d]) * g(head(x, d));
  };
  m.impulse_cost = [c = base.impulse_cost, d, alpha](const State& x, Action a) {
    return std::exp(-alpha * x[d]) * c(head(x, d), a);
  };
  m.jump = [l = base.jump, d](const State& x, Action a) { return append(l(head(x, d), a), x[d]); };
  m.bounds.lower = append(base.bounds.lower, 0.0);
  m.bounds.upper = append(base.bounds.upper, std::numeric_limits<double>::infinity());
  if (base.bounds.constraint) {
    m.bounds.constraint = LinearConstraint{append(base.bounds.constraint->weights, 0.0),
                                           base.bounds.constraint->bound};
  }
  if (base.cemetery) {
    m.cemetery = CemeterySpec{[p = base.cemetery->predicate, d](const State& x) { return p(head(x, d)); }};
  }
  dm.flow = FlowSpec::closed_form([f = base_flow, d](const State& x, double t) {
    return append(f.advance(head(x, d), t), x[d] + t);
  });
  return dm;
}

SliceEmbedding time_slice(double alpha, std::size_t base_dim) {
  const std::size_t d = base_dim;
  return SliceEmbedding{
      [](const State& y) { return append(y, 0.0); },
      [alpha, d](const State& x) { return std::make_pair(head(x, d), std::exp(-alpha * x[d])); }};
}

SolveResult solve_wrapped(const DiscountedModel& dm, std::shared_ptr<const Grid> y_grid,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                          const SolveOptions& opts) {
  if (y_grid->dim() != dm.base.dim()) throw ConfigError("grid dimension must match dim(Y)");
  const BellmanProblem problem{dm.model, dm.flow, 0.0};
  return value_iteration(problem, std::move(y_grid), cfg, q, opts, time_slice(dm.alpha, dm.base.dim()));
}

SolveResult discounted_value_iteration(const ImpulseModel& base, const FlowSpec& base_flow,
                                       double alpha, std::shared_ptr<const Grid> y_grid,
                                       const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                       const SolveOptions& opts) {
  if (!(alpha > 0.0)) throw ConfigError("discount.alpha must be > 0");
  const BellmanProblem problem{base, base_flow, alpha};
  return value_iteration(problem, std::move(y_grid), cfg, q, opts);
}

std::optional<double> discounted_forward_generator(const ValueFn& V_Y, const FlowSpec& base_flow,
                                                   const ImpulseModel& base_model, double alpha,
                                                   const State& y, const GeneratorConfig& g,
                                                   const QuadratureConfig& q) {
  if (alpha < 0.0) throw ConfigError("discount.alpha must be >= 0");
  return forward_generator(V_Y, base_flow, base_model, y, g, q, alpha);
}

namespace {

Bounds unit_interval() {
  Bounds b;
  b.lower = State{0.0};
  b.upper = State{1.0};
  return b;
}

}  // namespace

BuiltinModel constant_cost_model(double k, double delta) {
  if (!(k >= 0.0) || !(delta > 0.0)) throw ConfigError("constant_cost needs k >= 0 and delta > 0");
  ImpulseModel m;
  m.name = "constant_cost";
  m.gradual_cost = [k](const State&) { return k; };
  m.impulse_cost = [delta](const State&, Action) { return delta; };
  m.jump = [](const State& y, Action) { return y; };
  m.bounds = unit_interval();
  m.impulse_cost_floor = delta;
  return {m, FlowSpec::closed_form([](const State& y, double) { return y; })};
}

BuiltinModel maintenance_model(double r, double w, double repair_cost) {
  if (!(r > 0.0) || !(w > 0.0) || !(repair_cost > 0.0)) {
    throw ConfigError("maintenance needs rate, wear_cost and repair_cost > 0");
  }
  ImpulseModel m;
  m.name = "maintenance";
  m.gradual_cost = [w](const State& y) { return w * y[0]; };
  m.impulse_cost = [repair_cost](const State&, Action) { return repair_cost; };
  m.jump = [](const State&, Action) { return State{0.0}; };
  m.bounds = unit_interval();
  m.impulse_cost_floor = repair_cost;
  return {m, FlowSpec::closed_form([r](const State& y, double t) {
            return State{1.0 - (1.0 - y[0]) * std::exp(-r * t)};
          })};
}

}  // namespace impulse::discount
