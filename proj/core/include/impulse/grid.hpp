#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "impulse/core.hpp"

namespace impulse {

/// Rectangular tensor grid with a mask of nodes that lie inside the state
/// space. Values live on every node; nodes outside the mask are filled by
/// extrapolation from the inside so that multilinear interpolation stays
/// exact for linear data in cells cut by the boundary.
class Grid {
 public:
  struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t nodes = 2;
  };

  using InsideFn = std::function<bool(const State&)>;

  explicit Grid(std::vector<Axis> axes, InsideFn inside = {});

  std::size_t dim() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  double spacing(std::size_t axis) const;
  double min_spacing() const;

  std::size_t size() const { return total_; }
  std::size_t masked_count() const { return masked_.size(); }
  /// Node indices inside the mask, in lexicographic order (last axis fastest).
  const std::vector<std::size_t>& masked() const { return masked_; }
  bool in_mask(std::size_t node) const { return mask_[node] != 0; }

  std::vector<std::size_t> multi_index(std::size_t node) const;
  std::size_t flat_index(const std::vector<std::size_t>& idx) const;
  State point(std::size_t node) const;
  /// Index of the node nearest to x (after clamping to the box).
  std::size_t nearest(const State& x) const;

  /// Multilinear interpolation of node values with coordinates clamped to
  /// the box.
  double interpolate(const std::vector<double>& values, const State& x) const;

  /// Overwrites values at nodes outside the mask with extrapolated values.
  void fill_outside(std::vector<double>& values) const;

 private:
  struct Fill {
    std::size_t node;
    std::vector<std::pair<std::size_t, double>> terms;
  };
  void build_fill_plan();

  std::vector<Axis> axes_;
  std::vector<std::size_t> stride_;
  std::size_t total_ = 1;
  std::vector<char> mask_;
  std::vector<std::size_t> masked_;
  std::vector<Fill> fill_plan_;
};

/// Maps between grid coordinates and model states when the grid covers only
/// a slice of the state space (the time-augmented discounted model).
struct SliceEmbedding {
  /// Model state of a grid point.
  std::function<State(const State&)> lift;
  /// Grid point and multiplicative factor for a model state:
  /// V(x) = factor * V_grid(point).
  std::function<std::pair<State, double>(const State&)> project;
};

/// A value function sampled on a grid.
class ValueField {
 public:
  ValueField(std::shared_ptr<const Grid> grid, std::vector<double> values,
             std::optional<SliceEmbedding> embedding = std::nullopt);
  static ValueField zeros(std::shared_ptr<const Grid> grid,
                          std::optional<SliceEmbedding> embedding = std::nullopt);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<SliceEmbedding>& embedding() const { return embedding_; }

  std::size_t version() const { return version_; }
  void set_version(std::size_t v) { version_ = v; }

  /// Replaces the node values (masked nodes are taken as given, the rest are
  /// re-extrapolated).
  void assign(std::vector<double> values);

  /// Model state of a grid node.
  State node_state(std::size_t node) const;

  /// V at a model state by multilinear interpolation.
  double operator()(const State& x) const;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
  std::optional<SliceEmbedding> embedding_;
  std::size_t version_ = 0;
};

using ValueFn = std::function<double(const State&)>;

/// Wraps a field as a plain callable (copies the shared grid pointer).
ValueFn as_value_fn(const ValueField& field);

}  // namespace impulse
