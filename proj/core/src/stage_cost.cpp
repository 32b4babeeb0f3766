#include "impulse/stage_cost.hpp"

namespace impulse {

double stage_cost(const ImpulseModel& model, const FlowSpec& flow, const State& x,
                  const WaitTime& wait, Action a, const QuadratureConfig& q) {
  if (wait.is_infinite()) return stopping_value(flow, model, x, q);
  const double theta = wait.value();
  if (theta == 0.0) return model.impulse_cost(x, a);
  const double run = running_cost(flow, model, x, theta, q);
  return run + model.impulse_cost(advance(flow, x, theta), a);
}

}  // namespace impulse
