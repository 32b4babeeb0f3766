#include "impulse/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace impulse {

State::State(std::initializer_list<double> coords) : State(std::span<const double>(coords.begin(), coords.size())) {}

State::State(std::span<const double> coords) {
  if (coords.size() > kMaxDim) {
    throw DomainError("state dimension " + std::to_string(coords.size()) +
                      " exceeds the supported maximum");
  }
  std::copy(coords.begin(), coords.end(), c_.begin());
  dim_ = coords.size();
}

State State::zeros(std::size_t dim) {
  State s;
  if (dim > kMaxDim) throw DomainError("state dimension too large");
  s.dim_ = dim;
  return s;
}

bool State::finite() const {
  return std::all_of(c_.begin(), c_.begin() + dim_,
                     [](double v) { return std::isfinite(v); });
}

State& State::operator+=(const State& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

State& State::operator-=(const State& o) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

State& State::operator*=(double s) {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const State& a, const State& b) {
  if (a.dim_ != b.dim_) return false;
  return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

double max_norm(const State& x) {
  double m = 0.0;
  for (double v : x.coords()) m = std::max(m, std::abs(v));
  return m;
}

std::string to_string(const State& x) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

WaitTime WaitTime::finite(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("wait time must be finite and nonnegative, got " +
                      std::to_string(t));
  }
  return WaitTime(t);
}

double WaitTime::value() const {
  if (!value_) throw std::logic_error("WaitTime::value() on INFINITY");
  return *value_;
}

double WaitTime::as_double() const {
  return value_ ? *value_ : std::numeric_limits<double>::infinity();
}

std::string to_string(const WaitTime& w) {
  if (w.is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << w.value();
  return os.str();
}

bool Bounds::contains(const State& x, double tol) const {
  if (x.dim() != dim() || !x.finite()) return false;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double lo = lower[i];
    const double hi = upper[i];
    if (x[i] < lo - tol * (1.0 + std::abs(lo))) return false;
    if (std::isfinite(hi) && x[i] > hi + tol * (1.0 + std::abs(hi))) return false;
  }
  if (constraint) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += constraint->weights[i] * x[i];
    if (s > constraint->bound + tol * (1.0 + std::abs(constraint->bound))) return false;
  }
  return true;
}

State apply_impulse(const ImpulseModel& model, const State& x, Action a) {
  if (a.id >= model.action_count) {
    throw DomainError("action " + std::to_string(a.id) + " outside the action set of " +
                      model.name);
  }
  State y = model.jump(x, a);
  if (!model.contains(y)) {
    throw DomainError("jump from " + to_string(x) + " lands outside X at " +
                      to_string(y));
  }
  return y;
}

std::vector<State> lattice_samples(const ImpulseModel& model, std::size_t per_axis) {
  const std::size_t d = model.dim();
  per_axis = std::max<std::size_t>(per_axis, 2);
  std::vector<State> out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    State x = State::zeros(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double lo = model.bounds.lower[k];
      double hi = model.bounds.upper[k];
      if (!std::isfinite(hi)) hi = lo + 1.0;
      x[k] = lo + (hi - lo) * static_cast<double>(idx[k]) / static_cast<double>(per_axis - 1);
    }
    if (model.contains(x)) out.push_back(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

ModelValidation validate_model(const ImpulseModel& model, std::span<const State> samples) {
  ModelValidation report;
  if (model.action_count == 0) {
    report.warnings.push_back("action set is empty");
    return report;
  }
  double min_gradual = std::numeric_limits<double>::infinity();
  double min_impulse = std::numeric_limits<double>::infinity();
  for (const State& x : samples) {
    if (!model.contains(x)) continue;
    ++report.samples;
    min_gradual = std::min(min_gradual, model.gradual_cost(x));
    for (std::size_t a = 0; a < model.action_count; ++a) {
      // Throws DomainError if the jump leaves X.
      apply_impulse(model, x, Action{a});
      min_impulse = std::min(min_impulse, model.impulse_cost(x, Action{a}));
    }
    if (model.in_cemetery(x) && model.gradual_cost(x) != 0.0) {
      report.warnings.push_back("gradual cost nonzero on the cemetery set at " + to_string(x));
    }
  }
  if (report.samples == 0) return report;
  if (min_gradual < 0.0) {
    report.warnings.push_back("gradual cost takes negative values (min " +
                              std::to_string(min_gradual) + "); model is not positive");
  }
  if (min_impulse < 0.0) {
    report.warnings.push_back("impulse cost takes negative values (min " +
                              std::to_string(min_impulse) + "); model is not positive");
  }
  if (model.impulse_cost_floor && min_impulse < *model.impulse_cost_floor) {
    report.warnings.push_back("impulse cost falls below the declared floor " +
                              std::to_string(*model.impulse_cost_floor));
  }
  return report;
}

}  // namespace impulse
