#pragma once

#include <optional>
#include <string>

#include "impulse/core.hpp"
#include "impulse/flow.hpp"

namespace impulse::sir {

/// Susceptible-infective model with isolation impulses. State coordinates:
/// x[0] = susceptibles, x[1] = infectives.
struct SirParams {
  double beta = 4.0;   ///< infection rate
  double gamma = 3.0;  ///< recovery rate
  double c = 5.0;      ///< isolation cost per infective
  double N = 10.0;     ///< bound of the triangle x1 + x2 <= N

  void validate() const;
};

enum class RegimeTag { kSupercritical, kSubcriticalExpensive, kSubcriticalCheap };

struct Regime {
  RegimeTag tag;
  /// Slope s of the threshold line x2 = s * x1 (dispersal line when
  /// supercritical, switching line when subcritical-cheap).
  std::optional<double> threshold_slope;
};

std::string to_string(RegimeTag tag);

Regime classify(const SirParams& p);

/// Closed-form flow for beta != gamma and beta == gamma. Boundary states:
/// x2 = 0 is fixed, x1 = 0 decays as x2 * exp(-gamma t).
State sir_flow(const SirParams& p, const State& x, double t);

/// Right-hand side of the SI system (for ODE-integrated flows).
State sir_field(const SirParams& p, const State& x);

/// Infection rate beta x1 x2 / (x1 + x2); 0 at the origin.
double gradual_cost(const SirParams& p, const State& x);

/// Removed population x3 = x1(0) + x2(0) - x1 - x2.
double removed(const State& x0, const State& x);

ImpulseModel make_model(const SirParams& p);
FlowSpec make_flow(const SirParams& p);
FlowSpec make_ode_flow(const SirParams& p, double step = 1e-3);

/// Truncation horizon for integrals over (0, inf): 80 / min(|beta-gamma|, gamma),
/// and 80 / gamma when beta == gamma.
double default_horizon(const SirParams& p);

/// Closed-form optimal value on the triangle.
double analytic_value(const SirParams& p, const State& x);

/// Time until the flow from x first enters the intervention set: 0 inside it,
/// the switching-line hitting time in the subcritical-cheap regime, and
/// INFINITY when the flow never reaches it.
WaitTime analytic_strategy(const SirParams& p, const State& x);

/// The optimal stationary strategy (wait from analytic_strategy, action 0).
StationaryStrategy analytic_optimal_strategy(const SirParams& p);

/// Strategy "isolate as soon as x2 <= slope * x1". Uses the ratio identity
/// x2(t)/x1(t) = x2(0)/x1(0) exp((beta-gamma) t) to compute the wait.
StationaryStrategy threshold_strategy(const SirParams& p, double slope);

/// Switching-line hitting time in the subcritical-cheap regime: 0 on the
/// line, nullopt below it, +inf when x1 = 0. RegimeError in other regimes.
std::optional<double> line_hitting_time(const SirParams& p, const State& x);

/// Impulse gap along rays, x1 * Upsilon(x2/x1) = C^I + V(l) - V above the
/// switching line. Subcritical-cheap regime only.
double upsilon(const SirParams& p, double w);

enum class GradualKind { kZeta, kXi };

/// Threshold slope of the gradual-isolation problem with maximal rate U.
/// zeta requires beta >= gamma; xi requires the subcritical-cheap regime.
double gradual_threshold(const SirParams& p, double U, GradualKind kind);

}  // namespace impulse::sir
