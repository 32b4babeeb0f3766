#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "impulse/bellman.hpp"
#include "impulse/core.hpp"
#include "impulse/discount.hpp"
#include "impulse/flow.hpp"
#include "impulse/grid.hpp"
#include "impulse/sir.hpp"
#include "impulse/verify.hpp"

namespace impulse {

struct ModelSpec {
  std::string name = "sir";  ///< sir | constant_cost | maintenance
  sir::SirParams sir;
  bool ode_flow = false;     ///< integrate the SIR field with RK4 instead of the closed form
  double ode_step = 1e-3;
  double k = 2.0;            ///< constant_cost running cost
  double delta = 1.0;        ///< constant_cost impulse cost
  double rate = 1.0;         ///< maintenance wear rate
  double wear_cost = 1.0;    ///< maintenance cost per unit wear
  double repair_cost = 0.3;  ///< maintenance repair cost
  std::optional<double> alpha;
};

struct GridSpec {
  std::optional<std::size_t> nodes;  ///< per axis
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
};

struct SolveSpec {
  double tol = 1e-4;
  std::size_t max_iter = 200;
  std::size_t workers = 1;
  std::string initial = "zero";  ///< zero | stop
};

struct VerifySpec {
  std::string field;  ///< value-field CSV; default <output_dir>/value_field.csv
  std::optional<double> forward_margin;
  std::optional<double> gap_margin;
  std::optional<std::size_t> exclusion_cells;
  double gen_h = 1e-3;
  double gen_tol = 1e-3;
  std::size_t trajectories = 100;
};

struct SimulateSpec {
  std::vector<State> initial_states;
  std::size_t random_states = 0;
  std::string strategy = "analytic";  ///< analytic | numeric | stop | impulse_now | threshold
  double slope = 0.2;
  std::size_t max_impulses = 1000;
  double horizon = 1e6;
};

struct FiguresSpec {
  std::vector<State> initial_states;
  std::size_t lattice = 4;
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  ThetaSearchConfig theta;
  QuadratureConfig quadrature;
  bool horizon_given = false;
  SolveSpec solve;
  VerifySpec verify;
  SimulateSpec simulate;
  FiguresSpec figures;
  std::string output_dir = "out";
  std::uint64_t seed = 42;
};

/// Parses a run configuration. Unknown keys, wrong types and invalid values
/// raise ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Normalised configuration (all defaults filled in) as JSON text.
std::string config_to_json(const RunConfig& cfg);

/// A model ready to solve: for discounted runs `model`/`flow` are the
/// time-augmented ones and `embedding` maps the Y grid into them.
struct Instance {
  ImpulseModel model;
  FlowSpec flow;
  std::shared_ptr<const Grid> grid;
  std::optional<SliceEmbedding> embedding;
  std::optional<sir::SirParams> sir;
  std::optional<discount::DiscountedModel> discounted;
  QuadratureConfig quadrature;  ///< horizon resolved against the model default
  std::vector<std::string> warnings;
};

Instance instantiate(const RunConfig& cfg);

}  // namespace impulse
