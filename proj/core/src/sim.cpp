#include "impulse/sim.hpp"

#include <algorithm>
#include <cmath>

#include "impulse/csv.hpp"

namespace impulse {

namespace {

void sample(const FlowSpec& flow, Segment& seg, double span) {
  const std::size_t n = std::max<std::size_t>(200, static_cast<std::size_t>(std::ceil(span / 0.01)));
  seg.times.reserve(n + 1);
  seg.points.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = span * static_cast<double>(i) / static_cast<double>(n);
    seg.times.push_back(seg.start_time + u);
    seg.points.push_back(flow.advance(seg.start, u));
  }
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kStopped:
      return "STOPPED";
    case Termination::kCemetery:
      return "CEMETERY";
    case Termination::kHorizon:
      return "HORIZON";
    case Termination::kImpulseCap:
      return "IMPULSE_CAP";
  }
  return "STOPPED";
}

Trajectory simulate(const ImpulseModel& model, const FlowSpec& flow,
                    const StationaryStrategy& strategy, const State& x0, const SimCaps& caps,
                    const QuadratureConfig& q) {
  if (!model.contains(x0)) throw DomainError("simulate: initial state outside X: " + to_string(x0));
  Trajectory traj;
  State x = x0;
  double clock = 0.0;
  std::size_t zero_wait_run = 0;
  for (;;) {
    if (model.in_cemetery(x)) {
      traj.terminated = Termination::kCemetery;
      break;
    }
    const WaitTime w = strategy.wait(x);
    if (w.is_infinite()) {
      Segment seg{x, clock, INFINITY, {}, {}, stopping_value(flow, model, x, q)};
      if (caps.sample_paths) sample(flow, seg, caps.stop_display);
      traj.total_cost += seg.cost;
      traj.segments.push_back(std::move(seg));
      traj.terminated = Termination::kStopped;
      break;
    }
    double theta = w.value();
    const bool hits_horizon = clock + theta > caps.horizon;
    if (hits_horizon) theta = caps.horizon - clock;
    if (theta > 0.0) {
      Segment seg{x, clock, theta, {}, {}, running_cost(flow, model, x, theta, q)};
      if (caps.sample_paths) sample(flow, seg, theta);
      traj.total_cost += seg.cost;
      x = flow.advance(x, theta);
      clock += theta;
      traj.segments.push_back(std::move(seg));
      zero_wait_run = 0;
    }
    if (hits_horizon) {
      traj.terminated = Termination::kHorizon;
      break;
    }
    if (theta == 0.0 && ++zero_wait_run > caps.max_impulses) {
      traj.terminated = Termination::kImpulseCap;
      break;
    }
    const Action a = strategy.act(x);
    ImpulseEvent ev{clock, x, a, apply_impulse(model, x, a), model.impulse_cost(x, a)};
    traj.total_cost += ev.cost;
    x = ev.post;
    traj.impulses.push_back(ev);
  }
  return traj;
}

std::vector<double> evaluate_strategy(const ImpulseModel& model, const FlowSpec& flow,
                                      const StationaryStrategy& strategy,
                                      const std::vector<State>& states, const SimCaps& caps,
                                      const QuadratureConfig& q) {
  SimCaps c = caps;
  c.sample_paths = false;
  std::vector<double> out;
  out.reserve(states.size());
  for (const State& x : states) out.push_back(simulate(model, flow, strategy, x, c, q).total_cost);
  return out;
}

StationaryStrategy stop_strategy() {
  return {[](const State&) { return WaitTime::infinite(); }, [](const State&) { return Action{0}; }};
}

StationaryStrategy impulse_now_strategy() {
  return {[](const State&) { return WaitTime::finite(0.0); }, [](const State&) { return Action{0}; }};
}

StationaryStrategy fixed_delay_strategy(double delay) {
  const WaitTime w = WaitTime::finite(delay);
  return {[w](const State&) { return w; }, [](const State&) { return Action{0}; }};
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, std::size_t dim) {
  csv::Writer w(path);
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < dim; ++k) header.push_back("x" + std::to_string(k + 1));
  header.push_back("phase");
  w.row(header);
  auto emit = [&](double t, const State& x, const char* phase) {
    std::vector<std::string> cells{csv::format(t)};
    for (std::size_t k = 0; k < dim; ++k) cells.push_back(csv::format(x[k]));
    cells.emplace_back(phase);
    w.row(cells);
  };
  // Segments and impulses interleave in time order; an impulse at time t
  // follows the segment that ends at t.
  std::size_t next_imp = 0;
  auto flush_impulses_until = [&](double t) {
    while (next_imp < traj.impulses.size() && traj.impulses[next_imp].time <= t) {
      const ImpulseEvent& ev = traj.impulses[next_imp++];
      emit(ev.time, ev.pre, "impulse");
      emit(ev.time, ev.post, "impulse");
    }
  };
  for (const Segment& seg : traj.segments) {
    // Impulses strictly before this segment starts, or at its start time.
    flush_impulses_until(seg.start_time);
    for (std::size_t i = 0; i < seg.points.size(); ++i) emit(seg.times[i], seg.points[i], "flow");
  }
  flush_impulses_until(INFINITY);
  w.close();
}

}  // namespace impulse
