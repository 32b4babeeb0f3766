#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "impulse/core.hpp"
#include "impulse/flow.hpp"

namespace impulse {

struct Segment {
  State start;
  double start_time = 0.0;
  double duration = 0.0;  ///< +inf for the final "stop" segment
  std::vector<double> times;
  std::vector<State> points;
  double cost = 0.0;
};

struct ImpulseEvent {
  double time = 0.0;
  State pre;
  Action action;
  State post;
  double cost = 0.0;
};

enum class Termination { kStopped, kCemetery, kHorizon, kImpulseCap };
std::string to_string(Termination t);

struct Trajectory {
  std::vector<Segment> segments;
  std::vector<ImpulseEvent> impulses;
  double total_cost = 0.0;
  Termination terminated = Termination::kStopped;
};

struct SimCaps {
  std::size_t max_impulses = 1000;
  /// Simulation clock limit; a finite wait that would cross it ends the run
  /// with HORIZON after accruing the running cost up to it.
  double horizon = 1e6;
  /// Horizon over which the "stop" segment is sampled for output.
  double stop_display = 10.0;
  bool sample_paths = true;
};

/// Executes a stationary strategy from x0.
Trajectory simulate(const ImpulseModel& model, const FlowSpec& flow,
                    const StationaryStrategy& strategy, const State& x0, const SimCaps& caps,
                    const QuadratureConfig& q);

std::vector<double> evaluate_strategy(const ImpulseModel& model, const FlowSpec& flow,
                                      const StationaryStrategy& strategy,
                                      const std::vector<State>& states, const SimCaps& caps,
                                      const QuadratureConfig& q);

/// wait = INFINITY everywhere.
StationaryStrategy stop_strategy();
/// wait = 0 and action 0 everywhere.
StationaryStrategy impulse_now_strategy();
/// Fixed wait then action 0.
StationaryStrategy fixed_delay_strategy(double delay);

/// Trajectory CSV rows: t,x1,...,xd,phase with phase in {flow, impulse};
/// each impulse is a pre/post pair at the same t.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, std::size_t dim);

}  // namespace impulse
