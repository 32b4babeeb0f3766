#include "impulse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace impulse {

Grid::Grid(std::vector<Axis> axes, InsideFn inside) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > State::kMaxDim) {
    throw ConfigError("grid dimension must be between 1 and " + std::to_string(State::kMaxDim));
  }
  stride_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size(); k-- > 0;) {
    const Axis& a = axes_[k];
    if (a.nodes < 2) throw ConfigError("grid axis " + std::to_string(k) + " needs >= 2 nodes");
    if (!(a.upper > a.lower) || !std::isfinite(a.lower) || !std::isfinite(a.upper)) {
      throw ConfigError("grid axis " + std::to_string(k) + " needs finite lower < upper");
    }
    stride_[k] = total_;
    total_ *= a.nodes;
  }
  mask_.assign(total_, 1);
  for (std::size_t n = 0; n < total_; ++n) {
    if (inside && !inside(point(n))) mask_[n] = 0;
    if (mask_[n]) masked_.push_back(n);
  }
  if (masked_.empty()) throw ConfigError("grid mask is empty");
  build_fill_plan();
}

double Grid::spacing(std::size_t axis) const {
  const Axis& a = axes_[axis];
  return (a.upper - a.lower) / static_cast<double>(a.nodes - 1);
}

double Grid::min_spacing() const {
  double h = spacing(0);
  for (std::size_t k = 1; k < dim(); ++k) h = std::min(h, spacing(k));
  return h;
}

std::vector<std::size_t> Grid::multi_index(std::size_t node) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    idx[k] = node / stride_[k];
    node %= stride_[k];
  }
  return idx;
}

std::size_t Grid::flat_index(const std::vector<std::size_t>& idx) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < dim(); ++k) n += idx[k] * stride_[k];
  return n;
}

State Grid::point(std::size_t node) const {
  State x = State::zeros(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    const std::size_t i = node / stride_[k];
    node %= stride_[k];
    // Last node is pinned to the upper bound exactly.
    x[k] = i + 1 == axes_[k].nodes ? axes_[k].upper
                                   : axes_[k].lower + static_cast<double>(i) * spacing(k);
  }
  return x;
}

std::size_t Grid::nearest(const State& x) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    const double u = (std::clamp(x[k], axes_[k].lower, axes_[k].upper) - axes_[k].lower) / spacing(k);
    const auto i = static_cast<std::size_t>(std::lround(u));
    n += std::min(i, axes_[k].nodes - 1) * stride_[k];
  }
  return n;
}

double Grid::interpolate(const std::vector<double>& values, const State& x) const {
  const std::size_t d = dim();
  std::array<std::size_t, State::kMaxDim> base{};
  std::array<double, State::kMaxDim> frac{};
  for (std::size_t k = 0; k < d; ++k) {
    const Axis& a = axes_[k];
    const double u = (std::clamp(x[k], a.lower, a.upper) - a.lower) / spacing(k);
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i >= a.nodes - 1) i = a.nodes - 2;
    base[k] = i;
    frac[k] = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool up = (corner >> k) & 1U;
      w *= up ? frac[k] : 1.0 - frac[k];
      n += (base[k] + (up ? 1 : 0)) * stride_[k];
    }
    if (w != 0.0) acc += w * values[n];
  }
  return acc;
}

// Nodes outside the mask are visited in breadth-first order from the mask.
// Each one gets the parallelogram rule v(p) = v(q) + sum_k (v(q+s_k e_k) - v(q))
// with q = p - sum_k s_k e_k when all those nodes are known, which reproduces
// linear data exactly; otherwise the mean of its known axis neighbours.
void Grid::build_fill_plan() {
  const std::size_t d = dim();
  std::vector<char> known(mask_);
  std::deque<std::size_t> queue;
  std::vector<char> queued(total_, 0);

  auto neighbours = [&](std::size_t node) {
    std::vector<std::size_t> out;
    const auto idx = multi_index(node);
    for (std::size_t k = 0; k < d; ++k) {
      if (idx[k] > 0) out.push_back(node - stride_[k]);
      if (idx[k] + 1 < axes_[k].nodes) out.push_back(node + stride_[k]);
    }
    return out;
  };

  for (std::size_t n : masked_) queued[n] = 1;
  for (std::size_t n : masked_) {
    for (std::size_t m : neighbours(n)) {
      if (!queued[m]) {
        queued[m] = 1;
        queue.push_back(m);
      }
    }
  }

  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    const auto idx = multi_index(p);
    Fill fill{p, {}};

    // Try every sign pattern for the parallelogram base q.
    for (std::size_t signs = 0; signs < (std::size_t{1} << d) && fill.terms.empty(); ++signs) {
      std::vector<std::size_t> q_idx = idx;
      bool ok = true;
      for (std::size_t k = 0; k < d && ok; ++k) {
        const bool down = (signs >> k) & 1U;
        if (down) {
          if (idx[k] == 0) ok = false;
          else q_idx[k] = idx[k] - 1;
        } else {
          if (idx[k] + 1 >= axes_[k].nodes) ok = false;
          else q_idx[k] = idx[k] + 1;
        }
      }
      if (!ok) continue;
      const std::size_t q = flat_index(q_idx);
      if (!known[q]) continue;
      std::vector<std::pair<std::size_t, double>> terms{{q, 1.0 - static_cast<double>(d)}};
      for (std::size_t k = 0; k < d && ok; ++k) {
        std::vector<std::size_t> side = q_idx;
        side[k] = idx[k];
        const std::size_t s = flat_index(side);
        if (!known[s]) ok = false;
        terms.emplace_back(s, 1.0);
      }
      if (ok) fill.terms = std::move(terms);
    }
    if (fill.terms.empty()) {
      std::vector<std::size_t> src;
      for (std::size_t m : neighbours(p)) {
        if (known[m]) src.push_back(m);
      }
      for (std::size_t m : src) fill.terms.emplace_back(m, 1.0 / static_cast<double>(src.size()));
    }
    known[p] = 1;
    fill_plan_.push_back(std::move(fill));
    for (std::size_t m : neighbours(p)) {
      if (!queued[m]) {
        queued[m] = 1;
        queue.push_back(m);
      }
    }
  }
}

void Grid::fill_outside(std::vector<double>& values) const {
  for (const Fill& f : fill_plan_) {
    double v = 0.0;
    for (const auto& [n, w] : f.terms) v += w * values[n];
    values[f.node] = v;
  }
}

ValueField::ValueField(std::shared_ptr<const Grid> grid, std::vector<double> values,
                       std::optional<SliceEmbedding> embedding)
    : grid_(std::move(grid)), embedding_(std::move(embedding)) {
  assign(std::move(values));
}

ValueField ValueField::zeros(std::shared_ptr<const Grid> grid,
                             std::optional<SliceEmbedding> embedding) {
  const std::size_t n = grid->size();
  return ValueField(std::move(grid), std::vector<double>(n, 0.0), std::move(embedding));
}

void ValueField::assign(std::vector<double> values) {
  if (values.size() != grid_->size()) {
    throw DomainError("value field size " + std::to_string(values.size()) +
                      " does not match grid size " + std::to_string(grid_->size()));
  }
  for (std::size_t n : grid_->masked()) {
    if (!std::isfinite(values[n])) {
      throw DomainError("value field has a non-finite value at " + to_string(grid_->point(n)));
    }
  }
  values_ = std::move(values);
  grid_->fill_outside(values_);
}

State ValueField::node_state(std::size_t node) const {
  const State p = grid_->point(node);
  return embedding_ ? embedding_->lift(p) : p;
}

double ValueField::operator()(const State& x) const {
  if (embedding_) {
    const auto [p, factor] = embedding_->project(x);
    return factor * grid_->interpolate(values_, p);
  }
  return grid_->interpolate(values_, x);
}

ValueFn as_value_fn(const ValueField& field) {
  auto copy = std::make_shared<ValueField>(field);
  return [copy](const State& x) { return (*copy)(x); };
}

}  // namespace impulse
