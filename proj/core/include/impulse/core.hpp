#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace impulse {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state left the state space (mis-specified jump, flow blow-up, bad input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not meet its tolerances.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// The tail of an infinite-horizon integral could not be shown negligible.
class TailError : public Error {
 public:
  using Error::Error;
};

/// Operation called in a parameter regime where it is undefined.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

/// A point of the state space: a short vector of real coordinates stored
/// inline (no heap traffic in the inner loops of the solver).
class State {
 public:
  static constexpr std::size_t kMaxDim = 4;

  State() = default;
  State(std::initializer_list<double> coords);
  explicit State(std::span<const double> coords);
  static State zeros(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  std::span<const double> coords() const { return {c_.data(), dim_}; }

  bool finite() const;

  State& operator+=(const State& o);
  State& operator-=(const State& o);
  State& operator*=(double s);

  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator-(State a, const State& b) { return a -= b; }
  friend State operator*(State a, double s) { return a *= s; }
  friend State operator*(double s, State a) { return a *= s; }
  friend bool operator==(const State& a, const State& b);

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

double max_norm(const State& x);
std::string to_string(const State& x);

// ---------------------------------------------------------------------------
// Actions and wait times
// ---------------------------------------------------------------------------

struct Action {
  std::size_t id = 0;
  friend bool operator==(Action, Action) = default;
  friend auto operator<=>(Action, Action) = default;
};

/// Time until the next impulse. Either a finite nonnegative value or the
/// distinguished INFINITY meaning "never intervene again" (stop).
class WaitTime {
 public:
  static WaitTime finite(double t);
  static WaitTime infinite() { return WaitTime{}; }

  bool is_infinite() const { return !value_.has_value(); }
  bool is_finite() const { return value_.has_value(); }
  /// Throws std::logic_error for INFINITY.
  double value() const;
  /// The finite value, or +inf as a double for ordering/printing.
  double as_double() const;

  friend bool operator==(const WaitTime&, const WaitTime&) = default;
  friend bool operator<(const WaitTime& a, const WaitTime& b) {
    return a.as_double() < b.as_double();
  }

 private:
  WaitTime() = default;
  explicit WaitTime(double t) : value_(t) {}
  std::optional<double> value_;
};

std::string to_string(const WaitTime& w);

// ---------------------------------------------------------------------------
// State-space description
// ---------------------------------------------------------------------------

/// sum_i weights[i] * x[i] <= bound
struct LinearConstraint {
  State weights;
  double bound = 0.0;
};

/// Axis-aligned box plus an optional linear constraint. Upper bounds may be
/// +inf (the time coordinate of a discounted model).
struct Bounds {
  State lower;
  State upper;
  std::optional<LinearConstraint> constraint;

  std::size_t dim() const { return lower.dim(); }
  /// Membership with a relative slack `tol` on every inequality.
  bool contains(const State& x, double tol = 1e-12) const;
};

/// Absorbing "cemetery" subset where the process is effectively over.
struct CemeterySpec {
  std::function<bool(const State&)> predicate;
};

using GradualCostFn = std::function<double(const State&)>;
using ImpulseCostFn = std::function<double(const State&, Action)>;
using JumpFn = std::function<State(const State&, Action)>;

/// The impulse-control model: gradual cost rate, impulse cost, jump map and
/// a finite action set, plus the state-space description.
struct ImpulseModel {
  std::string name;
  GradualCostFn gradual_cost;
  ImpulseCostFn impulse_cost;
  JumpFn jump;
  std::size_t action_count = 1;
  Bounds bounds;
  /// Lower bound delta > 0 on the impulse cost, when the model guarantees one.
  std::optional<double> impulse_cost_floor;
  std::optional<CemeterySpec> cemetery;

  std::size_t dim() const { return bounds.dim(); }
  bool contains(const State& x) const { return bounds.contains(x); }
  bool in_cemetery(const State& x) const {
    return cemetery && cemetery->predicate(x);
  }
};

/// Stationary deterministic strategy: wait time and action as functions of
/// the current state.
struct StationaryStrategy {
  std::function<WaitTime(const State&)> wait;
  std::function<Action(const State&)> act;
};

/// Sampling-based model validation. Violations are reported as warnings;
/// only a jump leaving the state space is a hard error (DomainError).
struct ModelValidation {
  std::vector<std::string> warnings;
  std::size_t samples = 0;
  bool ok() const { return warnings.empty(); }
};

ModelValidation validate_model(const ImpulseModel& model,
                               std::span<const State> samples);

/// Deterministic lattice of states inside the model's bounds (per-axis
/// `per_axis` points; infinite upper bounds are replaced by lower + 1).
std::vector<State> lattice_samples(const ImpulseModel& model,
                                   std::size_t per_axis);

/// l(x, a), checked against the state space.
State apply_impulse(const ImpulseModel& model, const State& x, Action a);

}  // namespace impulse
