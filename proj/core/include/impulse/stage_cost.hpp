#pragma once

#include "impulse/core.hpp"
#include "impulse/flow.hpp"

namespace impulse {

/// One-step cost of the induced MDP: running cost over (0, theta] plus the
/// impulse cost at phi(x, theta). For theta = INFINITY the action is ignored
/// and the stopping value is returned.
double stage_cost(const ImpulseModel& model, const FlowSpec& flow, const State& x,
                  const WaitTime& wait, Action a, const QuadratureConfig& q);

}  // namespace impulse
