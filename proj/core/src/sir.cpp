#include "impulse/sir.hpp"

#include <cmath>
#include <limits>

namespace impulse::sir {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool balanced(const SirParams& p) {
  return std::abs(p.beta - p.gamma) <= 1e-12 * std::max(p.beta, p.gamma);
}

void require_nonnegative(const State& x) {
  if (x.dim() != 2 || !x.finite() || x[0] < 0.0 || x[1] < 0.0) {
    throw DomainError("SIR state must be two finite nonnegative coordinates, got " +
                      impulse::to_string(x));
  }
}

// log((1 + r e^{kt}) / (1 + r)) without overflow and without cancellation
// for small k t.
double log_growth(double r, double kt) {
  if (kt < 30.0) return std::log1p(r * std::expm1(kt) / (1.0 + r));
  const double z = std::log(r) + kt;
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - std::log1p(r);
}

}  // namespace

void SirParams::validate() const {
  if (!(beta > 0.0) || !(gamma > 0.0) || !(c > 0.0) || !(N > 0.0) || !std::isfinite(beta) ||
      !std::isfinite(gamma) || !std::isfinite(c) || !std::isfinite(N)) {
    throw ConfigError("SIR parameters beta, gamma, c, N must be finite and > 0");
  }
}

std::string to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::kSupercritical:
      return "SUPERCRITICAL";
    case RegimeTag::kSubcriticalExpensive:
      return "SUBCRITICAL_EXPENSIVE";
    case RegimeTag::kSubcriticalCheap:
      return "SUBCRITICAL_CHEAP";
  }
  return "UNKNOWN";
}

Regime classify(const SirParams& p) {
  p.validate();
  if (p.beta >= p.gamma) return {RegimeTag::kSupercritical, 1.0 / p.c};
  if (p.c >= p.beta / (p.gamma - p.beta)) return {RegimeTag::kSubcriticalExpensive, std::nullopt};
  const double slope = (p.beta + p.beta * p.c - p.gamma * p.c) / (p.gamma * p.c);
  return {RegimeTag::kSubcriticalCheap, slope};
}

State sir_flow(const SirParams& p, const State& x, double t) {
  require_nonnegative(x);
  if (!(t >= 0.0)) throw DomainError("SIR flow requires t >= 0");
  const double x1 = x[0];
  const double x2 = x[1];
  if (t == 0.0 || x2 == 0.0) return x;
  if (x1 == 0.0) return State{0.0, x2 * std::exp(-p.gamma * t)};
  const double r0 = x2 / x1;
  if (balanced(p)) {
    const double decay = std::exp(-p.beta * x2 * t / (x1 + x2));
    return State{x1 * decay, x2 * decay};
  }
  const double k = p.beta - p.gamma;
  const double expo = p.beta / k;
  const double log_s = -expo * log_growth(r0, k * t);
  return State{x1 * std::exp(log_s), x2 * std::exp(log_s + k * t)};
}

State sir_field(const SirParams& p, const State& x) {
  const double s = x[0] + x[1];
  const double infection = s > 0.0 ? p.beta * x[0] * x[1] / s : 0.0;
  return State{-infection, infection - p.gamma * x[1]};
}

double gradual_cost(const SirParams& p, const State& x) {
  const double s = x[0] + x[1];
  return s > 0.0 ? p.beta * x[0] * x[1] / s : 0.0;
}

double removed(const State& x0, const State& x) { return x0[0] + x0[1] - x[0] - x[1]; }

ImpulseModel make_model(const SirParams& p) {
  p.validate();
  ImpulseModel m;
  m.name = "sir";
  m.gradual_cost = [p](const State& x) { return gradual_cost(p, x); };
  m.impulse_cost = [p](const State& x, Action) { return p.c * x[1]; };
  m.jump = [](const State& x, Action) { return State{x[0], 0.0}; };
  m.action_count = 1;
  m.bounds.lower = State{0.0, 0.0};
  m.bounds.upper = State{p.N, p.N};
  m.bounds.constraint = LinearConstraint{State{1.0, 1.0}, p.N};
  const double cemetery_tol = 1e-12 * p.N;
  m.cemetery = CemeterySpec{[cemetery_tol](const State& x) { return x[1] <= cemetery_tol; }};
  return m;
}

FlowSpec make_flow(const SirParams& p) {
  p.validate();
  return FlowSpec::closed_form([p](const State& x, double t) { return sir_flow(p, x, t); });
}

FlowSpec make_ode_flow(const SirParams& p, double step) {
  p.validate();
  Bounds box;
  box.lower = State{0.0, 0.0};
  box.upper = State{p.N, p.N};
  return FlowSpec::ode_field([p](const State& x) { return sir_field(p, x); }, step, box);
}

double default_horizon(const SirParams& p) {
  if (balanced(p)) return 80.0 / p.gamma;
  return 80.0 / std::min(std::abs(p.beta - p.gamma), p.gamma);
}

double analytic_value(const SirParams& p, const State& x) {
  require_nonnegative(x);
  const double x1 = x[0];
  const double x2 = x[1];
  if (x1 == 0.0 || x2 == 0.0) return 0.0;
  const Regime regime = classify(p);
  switch (regime.tag) {
    case RegimeTag::kSupercritical:
      return x2 <= x1 / p.c ? p.c * x2 : x1;
    case RegimeTag::kSubcriticalExpensive:
      return x1 - x1 * std::pow(1.0 + x2 / x1, -p.beta / (p.gamma - p.beta));
    case RegimeTag::kSubcriticalCheap: {
      const double s = *regime.threshold_slope;
      if (x2 <= s * x1) return p.c * x2;
      const double base = p.gamma * p.c * (1.0 + x2 / x1) / (p.beta + p.beta * p.c);
      return x1 * (1.0 - std::pow(base, -p.beta / (p.gamma - p.beta)) * (1.0 + p.c) *
                             (p.gamma - p.beta) / p.gamma);
    }
  }
  return 0.0;
}

namespace {

// Wait until x2/x1 first drops to `slope` along the flow.
WaitTime wait_until_ratio(const SirParams& p, const State& x, double slope) {
  const double x1 = x[0];
  const double x2 = x[1];
  if (x2 == 0.0) return WaitTime::finite(0.0);
  if (x1 == 0.0) return WaitTime::infinite();
  if (x2 <= slope * x1) return WaitTime::finite(0.0);
  if (p.beta >= p.gamma) return WaitTime::infinite();
  return WaitTime::finite(std::log(x2 / (slope * x1)) / (p.gamma - p.beta));
}

}  // namespace

WaitTime analytic_strategy(const SirParams& p, const State& x) {
  require_nonnegative(x);
  const Regime regime = classify(p);
  if (regime.tag == RegimeTag::kSubcriticalExpensive) {
    return x[1] == 0.0 ? WaitTime::finite(0.0) : WaitTime::infinite();
  }
  return wait_until_ratio(p, x, *regime.threshold_slope);
}

StationaryStrategy analytic_optimal_strategy(const SirParams& p) {
  return {[p](const State& x) { return analytic_strategy(p, x); },
          [](const State&) { return Action{0}; }};
}

StationaryStrategy threshold_strategy(const SirParams& p, double slope) {
  if (!(slope >= 0.0)) throw DomainError("threshold slope must be >= 0");
  return {[p, slope](const State& x) { return wait_until_ratio(p, x, slope); },
          [](const State&) { return Action{0}; }};
}

std::optional<double> line_hitting_time(const SirParams& p, const State& x) {
  require_nonnegative(x);
  const Regime regime = classify(p);
  if (regime.tag != RegimeTag::kSubcriticalCheap) {
    throw RegimeError("line_hitting_time is defined only in the subcritical-cheap regime");
  }
  const double s = *regime.threshold_slope;
  if (x[1] < s * x[0]) return std::nullopt;
  if (x[1] == s * x[0]) return 0.0;
  if (x[0] == 0.0) return kInf;
  return std::log(p.gamma * p.c * x[1] / (x[0] * (p.beta + p.beta * p.c - p.gamma * p.c))) /
         (p.gamma - p.beta);
}

double upsilon(const SirParams& p, double w) {
  if (classify(p).tag != RegimeTag::kSubcriticalCheap) {
    throw RegimeError("upsilon is defined only in the subcritical-cheap regime");
  }
  if (!(w > 0.0)) throw DomainError("upsilon requires w > 0");
  const double base = p.gamma * p.c * (1.0 + w) / (p.beta + p.beta * p.c);
  return p.c * w - 1.0 +
         std::pow(base, -p.beta / (p.gamma - p.beta)) * (1.0 + p.c) * (p.gamma - p.beta) / p.gamma;
}

double gradual_threshold(const SirParams& p, double U, GradualKind kind) {
  p.validate();
  if (!(U > 0.0)) throw DomainError("maximal isolation rate U must be > 0");
  const double expo = (p.gamma + U - p.beta) / (p.gamma + U);
  if (kind == GradualKind::kZeta) {
    if (p.beta < p.gamma) throw RegimeError("zeta(U) requires beta >= gamma");
    return std::pow((p.gamma + U + p.c * U) / (p.c * U), expo) - 1.0;
  }
  if (classify(p).tag != RegimeTag::kSubcriticalCheap) {
    throw RegimeError("xi(U) requires beta < gamma and c < beta/(gamma-beta)");
  }
  return std::pow(p.beta * (p.gamma + U + p.c * U) / (p.c * p.gamma * (p.gamma + U - p.beta)),
                  expo) -
         1.0;
}

}  // namespace impulse::sir
