#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "impulse/bellman.hpp"
#include "impulse/core.hpp"
#include "impulse/flow.hpp"
#include "impulse/grid.hpp"
#include "impulse/verify.hpp"

namespace impulse::discount {

/// A discounted model on Y rewritten as a total-cost model on X = Y x [0, inf)
/// with the time coordinate last: costs carry exp(-alpha s) and jumps keep s.
struct DiscountedModel {
  ImpulseModel base;
  FlowSpec base_flow;
  double alpha = 0.0;
  ImpulseModel model;  ///< on Y x time
  FlowSpec flow;       ///< (phi_Y(y,t), s+t)
  std::vector<std::string> warnings;
};

/// Builds the time-augmented model. Throws ConfigError for alpha <= 0 and
/// warns when sampled |C^g_Y| looks unbounded (or is not finite).
DiscountedModel wrap_discounted(const ImpulseModel& base, const FlowSpec& base_flow, double alpha);

/// Embedding of a Y grid at s = 0: V((y, s)) = exp(-alpha s) V_Y(y).
SliceEmbedding time_slice(double alpha, std::size_t base_dim);

/// Value iteration on the wrapped model with only the s = 0 slice gridded.
SolveResult solve_wrapped(const DiscountedModel& dm, std::shared_ptr<const Grid> y_grid,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                          const SolveOptions& opts);

/// Value iteration on the discounted backup directly on Y:
/// V_Y(y) = min_theta { int_0^theta exp(-alpha u) C^g du
///                      + exp(-alpha theta) IV_Y(phi(y, theta)) }.
SolveResult discounted_value_iteration(const ImpulseModel& base, const FlowSpec& base_flow,
                                       double alpha, std::shared_ptr<const Grid> y_grid,
                                       const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                       const SolveOptions& opts);

/// Finite-difference estimate of
/// lim [exp(-alpha h) V_Y(phi(y,h)) - V_Y(y)]/h + (1/h) int_0^h exp(-alpha u) C^g_Y.
std::optional<double> discounted_forward_generator(const ValueFn& V_Y, const FlowSpec& base_flow,
                                                   const ImpulseModel& base_model, double alpha,
                                                   const State& y, const GeneratorConfig& g,
                                                   const QuadratureConfig& q);

/// Built-in test models on Y = [0, 1].
struct BuiltinModel {
  ImpulseModel model;
  FlowSpec flow;
};

/// phi(y,t) = y, C^g = k, impulse l(y) = y with cost delta: V_Y = k / alpha.
BuiltinModel constant_cost_model(double k, double delta);

/// Wear y drifts to 1: phi(y,t) = 1 - (1-y) exp(-r t); C^g = w y; repair
/// l(y) = 0 at cost `repair_cost`.
BuiltinModel maintenance_model(double r, double w, double repair_cost);

}  // namespace impulse::discount
