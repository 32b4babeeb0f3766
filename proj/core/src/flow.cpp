#include "impulse/flow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace impulse {

namespace {

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk_piece(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  const double v = GK15::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, err};
}

void check_box(const FlowSpec& flow, const State& y, const State& from, double t) {
  if (flow.box() && !flow.box()->contains(y, 1e-9)) {
    throw DomainError("trajectory from " + to_string(from) + " leaves the flow box at t=" +
                      std::to_string(t) + " (state " + to_string(y) + ")");
  }
}

State rk4_step(const FlowSpec::FieldFn& f, const State& y, double dt) {
  const State k1 = f(y);
  const State k2 = f(y + (0.5 * dt) * k1);
  const State k3 = f(y + (0.5 * dt) * k2);
  const State k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::size_t step_count(double t, double h) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / h - 1e-12)));
}

// RK4 on the augmented system (y, J), J' = rate(y, u), over [0, t] starting
// at clock value u0. Returns (y(t), J(t)).
std::pair<State, double> ode_path(const FlowSpec& flow, const PathRate& rate, const State& x,
                                  double u0, double t) {
  const std::size_t n = step_count(t, flow.step());
  const double dt = t / static_cast<double>(n);
  const auto& f = flow.field();
  State y = x;
  double acc = 0.0;
  double u = u0;
  for (std::size_t i = 0; i < n; ++i) {
    const State k1 = f(y);
    const double j1 = rate(y, u);
    const State y2 = y + (0.5 * dt) * k1;
    const State k2 = f(y2);
    const double j2 = rate(y2, u + 0.5 * dt);
    const State y3 = y + (0.5 * dt) * k2;
    const State k3 = f(y3);
    const double j3 = rate(y3, u + 0.5 * dt);
    const State y4 = y + dt * k3;
    const State k4 = f(y4);
    const double j4 = rate(y4, u + dt);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    acc += (dt / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    u = u0 + static_cast<double>(i + 1) * dt;
    check_box(flow, y, x, u);
  }
  return {y, acc};
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("quadrature horizon must be > 0");
  if (max_subdivisions == 0) throw ConfigError("quadrature max_subdivisions must be >= 1");
}

FlowSpec FlowSpec::closed_form(AdvanceFn advance, std::optional<Bounds> box) {
  FlowSpec f;
  f.kind_ = Kind::kClosedForm;
  f.advance_ = std::move(advance);
  f.box_ = std::move(box);
  return f;
}

FlowSpec FlowSpec::ode_field(FieldFn field, double step, std::optional<Bounds> box) {
  if (!(step > 0.0)) throw ConfigError("ODE integrator step must be > 0");
  FlowSpec f;
  f.kind_ = Kind::kOdeField;
  f.field_ = std::move(field);
  f.step_ = step;
  f.box_ = std::move(box);
  return f;
}

State FlowSpec::advance(const State& x, double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("advance requires finite t >= 0, got " + std::to_string(t));
  }
  if (t == 0.0) return x;
  if (kind_ == Kind::kClosedForm) {
    State y = advance_(x, t);
    check_box(*this, y, x, t);
    return y;
  }
  const std::size_t n = step_count(t, step_);
  const double dt = t / static_cast<double>(n);
  State y = x;
  for (std::size_t i = 0; i < n; ++i) {
    y = rk4_step(field_, y, dt);
    check_box(*this, y, x, dt * static_cast<double>(i + 1));
  }
  return y;
}

State advance(const FlowSpec& flow, const State& x, double t) { return flow.advance(x, t); }

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureConfig& q) {
  if (b <= a) return 0.0;
  std::priority_queue<Piece> heap;
  Piece first = gk_piece(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  std::size_t splits = 0;
  while (total_err > std::max(q.abs_tol, q.rel_tol * std::abs(total))) {
    if (splits >= q.max_subdivisions) {
      throw QuadratureError("adaptive quadrature on [" + std::to_string(a) + ", " +
                            std::to_string(b) + "] did not converge: error " +
                            std::to_string(total_err) + " after " + std::to_string(splits) +
                            " subdivisions");
    }
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("adaptive quadrature: interval underflow near " +
                            std::to_string(worst.a));
    }
    Piece left = gk_piece(f, worst.a, mid);
    Piece right = gk_piece(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed the drift of the running updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  if (!std::isfinite(sum)) throw QuadratureError("quadrature produced a non-finite value");
  return sum;
}

double path_integral(const FlowSpec& flow, const PathRate& rate, const State& x, double t0,
                     double t1, const QuadratureConfig& q) {
  if (!(t0 >= 0.0) || !(t1 >= t0) || !std::isfinite(t1)) {
    throw DomainError("path_integral requires 0 <= t0 <= t1 < inf");
  }
  if (t1 == t0) return 0.0;
  if (flow.kind() == FlowSpec::Kind::kOdeField) {
    const State start = t0 > 0.0 ? flow.advance(x, t0) : x;
    return ode_path(flow, rate, start, t0, t1 - t0).second;
  }
  auto integrand = [&](double u) { return rate(flow.advance(x, u), u); };
  return integrate_adaptive(integrand, t0, t1, q);
}

double path_integral_to_infinity(const FlowSpec& flow, const PathRate& rate, const State& x,
                                 const QuadratureConfig& q) {
  double horizon = q.horizon;
  double total = path_integral(flow, rate, x, 0.0, horizon, q);
  double tail = 0.0;
  for (std::size_t doubling = 0;; ++doubling) {
    const double delta = horizon / 10.0;
    const double f_end = std::abs(rate(flow.advance(x, horizon), horizon));
    const double f_mid = std::abs(rate(flow.advance(x, horizon - delta), horizon - delta));
    if (f_end == 0.0) {
      tail = 0.0;
    } else if (f_mid > f_end) {
      const double k = std::log(f_mid / f_end) / delta;
      tail = f_end / k;
    } else {
      tail = std::numeric_limits<double>::infinity();
    }
    const double budget = std::max(q.abs_tol, q.rel_tol * std::abs(total));
    if (tail <= budget) break;
    if (doubling >= q.max_horizon_doublings) {
      if (q.tail_bound_check) {
        throw TailError("tail of the infinite-horizon integral from " + to_string(x) +
                        " is not negligible at T=" + std::to_string(horizon) +
                        " (estimate " + std::to_string(tail) + ")");
      }
      if (!std::isfinite(tail)) tail = 0.0;
      break;
    }
    total += path_integral(flow, rate, x, horizon, 2.0 * horizon, q);
    horizon *= 2.0;
  }
  return total + tail;
}

double running_cost(const FlowSpec& flow, const ImpulseModel& model, const State& x,
                    double theta, const QuadratureConfig& q) {
  if (theta == 0.0) return 0.0;
  const auto& cg = model.gradual_cost;
  return path_integral(flow, [&cg](const State& y, double) { return cg(y); }, x, 0.0, theta, q);
}

double stopping_value(const FlowSpec& flow, const ImpulseModel& model, const State& x,
                      const QuadratureConfig& q) {
  if (model.in_cemetery(x)) return 0.0;
  const auto& cg = model.gradual_cost;
  return path_integral_to_infinity(flow, [&cg](const State& y, double) { return cg(y); }, x, q);
}

UniformBoundReport check_uniform_bound(const FlowSpec& flow, const ImpulseModel& model,
                                       std::span<const State> samples,
                                       const QuadratureConfig& q) {
  UniformBoundReport report;
  const auto& cg = model.gradual_cost;
  PathRate abs_rate = [&cg](const State& y, double) { return std::abs(cg(y)); };
  for (const State& x : samples) {
    if (model.in_cemetery(x)) continue;
    try {
      report.k_hat = std::max(report.k_hat, path_integral_to_infinity(flow, abs_rate, x, q));
    } catch (const TailError&) {
      report.finite = false;
      ++report.failures;
    } catch (const QuadratureError&) {
      report.finite = false;
      ++report.failures;
    }
  }
  if (!report.finite) report.k_hat = std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace impulse
