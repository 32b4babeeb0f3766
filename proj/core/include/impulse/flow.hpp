#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "impulse/core.hpp"

namespace impulse {

/// Numerical integration settings for integrals of the cost along the flow.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// Maximum number of interval bisections in one adaptive integral.
  std::size_t max_subdivisions = 4000;
  /// T_max: truncation point for integrals over (0, inf).
  double horizon = 80.0;
  bool tail_bound_check = true;
  /// How many times the horizon may be doubled before the tail is declared
  /// not negligible.
  std::size_t max_horizon_doublings = 10;

  void validate() const;
};

/// The semigroup phi(x, t). Closed-form flows evaluate phi directly; ODE
/// flows integrate x' = f(x) with fixed-step classical RK4 (step <= h), so
/// `advance` is deterministic and bit-reproducible.
class FlowSpec {
 public:
  enum class Kind { kClosedForm, kOdeField };
  using AdvanceFn = std::function<State(const State&, double)>;
  using FieldFn = std::function<State(const State&)>;

  static FlowSpec closed_form(AdvanceFn advance, std::optional<Bounds> box = std::nullopt);
  static FlowSpec ode_field(FieldFn field, double step = 1e-3,
                            std::optional<Bounds> box = std::nullopt);

  Kind kind() const { return kind_; }
  double step() const { return step_; }
  const FieldFn& field() const { return field_; }
  const std::optional<Bounds>& box() const { return box_; }

  State advance(const State& x, double t) const;

 private:
  FlowSpec() = default;
  Kind kind_ = Kind::kClosedForm;
  AdvanceFn advance_;
  FieldFn field_;
  double step_ = 0.0;
  std::optional<Bounds> box_;
};

/// phi(x, t) for finite t >= 0. Throws DomainError if the trajectory leaves
/// the flow's bounding box.
State advance(const FlowSpec& flow, const State& x, double t);

/// Integrand along a trajectory: rate(phi(x, u), u).
using PathRate = std::function<double(const State&, double)>;

/// int_{t0}^{t1} rate(phi(x,u), u) du. Adaptive Gauss-Kronrod for closed-form
/// flows; an augmented RK4 component for ODE flows.
double path_integral(const FlowSpec& flow, const PathRate& rate, const State& x,
                     double t0, double t1, const QuadratureConfig& q);

/// int_{(0,inf)} rate(phi(x,u), u) du: integral to the horizon plus an
/// exponential tail estimate fitted on the last tenth of the horizon. The
/// horizon is doubled while the tail is not negligible; TailError if it
/// never becomes negligible and q.tail_bound_check is set.
double path_integral_to_infinity(const FlowSpec& flow, const PathRate& rate, const State& x,
                                 const QuadratureConfig& q);

/// int_{(0,theta]} C^g(phi(x,u)) du.
double running_cost(const FlowSpec& flow, const ImpulseModel& model, const State& x,
                    double theta, const QuadratureConfig& q);

/// Cost of the "stop" decision: int_{(0,inf)} C^g(phi(x,u)) du. Zero on the
/// cemetery set.
double stopping_value(const FlowSpec& flow, const ImpulseModel& model, const State& x,
                      const QuadratureConfig& q);

struct UniformBoundReport {
  bool finite = true;
  double k_hat = 0.0;
  std::size_t failures = 0;
};

/// Estimates K = sup_x int_{(0,inf)} |C^g(phi(x,u))| du over the samples.
UniformBoundReport check_uniform_bound(const FlowSpec& flow, const ImpulseModel& model,
                                       std::span<const State> samples,
                                       const QuadratureConfig& q);

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with a global error budget
/// max(abs_tol, rel_tol*|I|). Throws QuadratureError when the budget is not
/// met within max_subdivisions.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& q);

}  // namespace impulse
