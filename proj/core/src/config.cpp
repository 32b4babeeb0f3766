#include "impulse/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace impulse {

namespace {

using nlohmann::json;

// Strict reader over one JSON object: typed getters record which keys were
// consumed, finish() rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!has(key)) return;
    out = as<T>(key);
  }

  template <class T>
  void get_opt(const std::string& key, std::optional<T>& out) {
    used_.insert(key);
    if (has(key)) out = as<T>(key);
  }

  Obj child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Obj(has(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  std::vector<State> states(const std::string& key) {
    used_.insert(key);
    std::vector<State> out;
    if (!has(key)) return out;
    const json& arr = j_.at(key);
    if (!arr.is_array()) throw ConfigError(where(key) + " must be an array of points");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& pt = arr[i];
      if (!pt.is_array() || pt.empty() || pt.size() > State::kMaxDim) {
        throw ConfigError(where(key) + "[" + std::to_string(i) + "] must be an array of 1-4 numbers");
      }
      State x = State::zeros(pt.size());
      for (std::size_t k = 0; k < pt.size(); ++k) {
        if (!pt[k].is_number()) throw ConfigError(where(key) + "[" + std::to_string(i) + "] must hold numbers");
        x[k] = pt[k].get<double>();
      }
      out.push_back(x);
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
    }
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : "'" + path_ + "'";
    return "'" + (path_.empty() ? key : path_ + "." + key) + "'";
  }

 private:
  template <class T>
  T as(const std::string& key) const {
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where(key) + " must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(where(key) + " must be a nonnegative integer");
      }
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      }
    } else {
      if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

json states_json(const std::vector<State>& xs) {
  json arr = json::array();
  for (const State& x : xs) {
    json pt = json::array();
    for (double c : x.coords()) pt.push_back(c);
    arr.push_back(pt);
  }
  return arr;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  RunConfig cfg;
  Obj top(root, "");

  ModelSpec& m = cfg.model;
  top.get("model", m.name);
  require(m.name == "sir" || m.name == "constant_cost" || m.name == "maintenance",
          "'model' must be one of sir, constant_cost, maintenance (got '" + m.name + "')");
  {
    Obj p = top.child("params");
    if (m.name == "sir") {
      p.get("beta", m.sir.beta);
      p.get("gamma", m.sir.gamma);
      p.get("c", m.sir.c);
      p.get("N", m.sir.N);
      p.get("ode_flow", m.ode_flow);
      p.get("ode_step", m.ode_step);
      require(m.sir.beta > 0, "'params.beta' must be > 0");
      require(m.sir.gamma > 0, "'params.gamma' must be > 0");
      require(m.sir.c > 0, "'params.c' must be > 0");
      require(m.sir.N > 0, "'params.N' must be > 0");
      require(m.ode_step > 0, "'params.ode_step' must be > 0");
    } else if (m.name == "constant_cost") {
      p.get("k", m.k);
      p.get("delta", m.delta);
      require(m.k >= 0, "'params.k' must be >= 0");
      require(m.delta > 0, "'params.delta' must be > 0");
    } else {
      p.get("rate", m.rate);
      p.get("wear_cost", m.wear_cost);
      p.get("repair_cost", m.repair_cost);
      require(m.rate > 0, "'params.rate' must be > 0");
      require(m.wear_cost > 0, "'params.wear_cost' must be > 0");
      require(m.repair_cost > 0, "'params.repair_cost' must be > 0");
    }
    p.finish();
  }
  if (top.has("discount")) {
    Obj d = top.child("discount");
    double alpha = 0.0;
    require(d.has("alpha"), "'discount.alpha' is required when 'discount' is given");
    d.get("alpha", alpha);
    require(alpha > 0, "'discount.alpha' must be > 0");
    m.alpha = alpha;
    d.finish();
  } else {
    top.child("discount");
  }
  require(m.alpha || m.name == "sir",
          "model '" + m.name + "' is a discounted test model and needs 'discount.alpha'");

  {
    Obj g = top.child("grid");
    g.get_opt("nodes", cfg.grid.nodes);
    g.get_opt("lower", cfg.grid.lower);
    g.get_opt("upper", cfg.grid.upper);
    require(!cfg.grid.nodes || *cfg.grid.nodes >= 2, "'grid.nodes' must be >= 2");
    g.finish();
  }
  {
    Obj t = top.child("theta_search");
    t.get("count", cfg.theta.count);
    t.get("t_max", cfg.theta.t_max);
    t.get("t_min_ratio", cfg.theta.t_min_ratio);
    t.get("refine_iterations", cfg.theta.refine_iterations);
    t.get("tie_tol", cfg.theta.tie_tol);
    t.finish();
    cfg.theta.validate();
  }
  {
    Obj q = top.child("quadrature");
    q.get("rel_tol", cfg.quadrature.rel_tol);
    q.get("abs_tol", cfg.quadrature.abs_tol);
    q.get("max_subdivisions", cfg.quadrature.max_subdivisions);
    cfg.horizon_given = q.has("horizon");
    q.get("horizon", cfg.quadrature.horizon);
    q.get("tail_bound_check", cfg.quadrature.tail_bound_check);
    q.get("max_horizon_doublings", cfg.quadrature.max_horizon_doublings);
    q.finish();
    require(cfg.quadrature.rel_tol > 0, "'quadrature.rel_tol' must be > 0");
    require(cfg.quadrature.abs_tol > 0, "'quadrature.abs_tol' must be > 0");
    require(cfg.quadrature.horizon > 0, "'quadrature.horizon' must be > 0");
    require(cfg.quadrature.max_subdivisions > 0, "'quadrature.max_subdivisions' must be >= 1");
  }
  {
    Obj s = top.child("solve");
    s.get("tol", cfg.solve.tol);
    s.get("max_iter", cfg.solve.max_iter);
    s.get("workers", cfg.solve.workers);
    s.get("initial", cfg.solve.initial);
    s.finish();
    require(cfg.solve.tol > 0, "'solve.tol' must be > 0");
    require(cfg.solve.max_iter >= 1, "'solve.max_iter' must be >= 1");
    require(cfg.solve.initial == "zero" || cfg.solve.initial == "stop",
            "'solve.initial' must be 'zero' or 'stop'");
  }
  {
    Obj v = top.child("verify");
    v.get("field", cfg.verify.field);
    v.get_opt("forward_margin", cfg.verify.forward_margin);
    v.get_opt("gap_margin", cfg.verify.gap_margin);
    v.get_opt("exclusion_cells", cfg.verify.exclusion_cells);
    v.get("gen_h", cfg.verify.gen_h);
    v.get("gen_tol", cfg.verify.gen_tol);
    v.get("trajectories", cfg.verify.trajectories);
    v.finish();
    require(cfg.verify.gen_h > 0, "'verify.gen_h' must be > 0");
    require(cfg.verify.gen_tol > 0, "'verify.gen_tol' must be > 0");
  }
  {
    Obj s = top.child("simulate");
    cfg.simulate.initial_states = s.states("initial_states");
    s.get("random_states", cfg.simulate.random_states);
    s.get("strategy", cfg.simulate.strategy);
    s.get("slope", cfg.simulate.slope);
    s.get("max_impulses", cfg.simulate.max_impulses);
    s.get("horizon", cfg.simulate.horizon);
    s.finish();
    const std::string& st = cfg.simulate.strategy;
    require(st == "analytic" || st == "numeric" || st == "stop" || st == "impulse_now" ||
                st == "threshold",
            "'simulate.strategy' must be analytic, numeric, stop, impulse_now or threshold");
    require(cfg.simulate.slope >= 0, "'simulate.slope' must be >= 0");
    require(cfg.simulate.horizon > 0, "'simulate.horizon' must be > 0");
  }
  {
    Obj f = top.child("figures");
    cfg.figures.initial_states = f.states("initial_states");
    f.get("lattice", cfg.figures.lattice);
    f.finish();
  }
  top.get("output_dir", cfg.output_dir);
  top.get("seed", cfg.seed);
  top.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["model"] = c.model.name;
  if (c.model.name == "sir") {
    j["params"] = {{"beta", c.model.sir.beta}, {"gamma", c.model.sir.gamma}, {"c", c.model.sir.c},
                   {"N", c.model.sir.N},       {"ode_flow", c.model.ode_flow},
                   {"ode_step", c.model.ode_step}};
  } else if (c.model.name == "constant_cost") {
    j["params"] = {{"k", c.model.k}, {"delta", c.model.delta}};
  } else {
    j["params"] = {{"rate", c.model.rate},
                   {"wear_cost", c.model.wear_cost},
                   {"repair_cost", c.model.repair_cost}};
  }
  if (c.model.alpha) j["discount"] = {{"alpha", *c.model.alpha}};
  json g = json::object();
  if (c.grid.nodes) g["nodes"] = *c.grid.nodes;
  if (c.grid.lower) g["lower"] = *c.grid.lower;
  if (c.grid.upper) g["upper"] = *c.grid.upper;
  j["grid"] = g;
  j["theta_search"] = {{"count", c.theta.count},
                       {"t_max", c.theta.t_max},
                       {"t_min_ratio", c.theta.t_min_ratio},
                       {"refine_iterations", c.theta.refine_iterations},
                       {"tie_tol", c.theta.tie_tol}};
  j["quadrature"] = {{"rel_tol", c.quadrature.rel_tol},
                     {"abs_tol", c.quadrature.abs_tol},
                     {"max_subdivisions", c.quadrature.max_subdivisions},
                     {"horizon", c.quadrature.horizon},
                     {"tail_bound_check", c.quadrature.tail_bound_check},
                     {"max_horizon_doublings", c.quadrature.max_horizon_doublings}};
  j["solve"] = {{"tol", c.solve.tol},
                {"max_iter", c.solve.max_iter},
                {"workers", c.solve.workers},
                {"initial", c.solve.initial}};
  json v = {{"field", c.verify.field},
            {"gen_h", c.verify.gen_h},
            {"gen_tol", c.verify.gen_tol},
            {"trajectories", c.verify.trajectories}};
  if (c.verify.forward_margin) v["forward_margin"] = *c.verify.forward_margin;
  if (c.verify.gap_margin) v["gap_margin"] = *c.verify.gap_margin;
  if (c.verify.exclusion_cells) v["exclusion_cells"] = *c.verify.exclusion_cells;
  j["verify"] = v;
  j["simulate"] = {{"initial_states", states_json(c.simulate.initial_states)},
                   {"random_states", c.simulate.random_states},
                   {"strategy", c.simulate.strategy},
                   {"slope", c.simulate.slope},
                   {"max_impulses", c.simulate.max_impulses},
                   {"horizon", c.simulate.horizon}};
  j["figures"] = {{"initial_states", states_json(c.figures.initial_states)},
                  {"lattice", c.figures.lattice}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2);
}

Instance instantiate(const RunConfig& cfg) {
  const ModelSpec& m = cfg.model;
  ImpulseModel base;
  std::optional<FlowSpec> base_flow;
  double default_horizon = 80.0;
  std::optional<sir::SirParams> sir_params;

  if (m.name == "sir") {
    base = sir::make_model(m.sir);
    base_flow = m.ode_flow ? sir::make_ode_flow(m.sir, m.ode_step) : sir::make_flow(m.sir);
    default_horizon = sir::default_horizon(m.sir);
    sir_params = m.sir;
  } else if (m.name == "constant_cost") {
    auto b = discount::constant_cost_model(m.k, m.delta);
    base = b.model;
    base_flow = b.flow;
  } else {
    auto b = discount::maintenance_model(m.rate, m.wear_cost, m.repair_cost);
    base = b.model;
    base_flow = b.flow;
  }
  if (m.alpha) default_horizon = std::min(default_horizon, 40.0 / *m.alpha);

  // Grid over the (base) state space.
  const std::size_t d = base.dim();
  const std::size_t nodes = cfg.grid.nodes.value_or(m.name == "sir" ? 161 : 101);
  std::vector<double> lower(base.bounds.lower.coords().begin(), base.bounds.lower.coords().end());
  std::vector<double> upper(base.bounds.upper.coords().begin(), base.bounds.upper.coords().end());
  if (cfg.grid.lower) {
    require(cfg.grid.lower->size() == d, "'grid.lower' must have " + std::to_string(d) + " entries");
    lower = *cfg.grid.lower;
  }
  if (cfg.grid.upper) {
    require(cfg.grid.upper->size() == d, "'grid.upper' must have " + std::to_string(d) + " entries");
    upper = *cfg.grid.upper;
  }
  std::vector<Grid::Axis> axes;
  for (std::size_t k = 0; k < d; ++k) {
    require(upper[k] > lower[k], "'grid' needs lower < upper on every axis");
    axes.push_back({lower[k], upper[k], nodes});
  }
  Bounds bounds = base.bounds;
  auto grid = std::make_shared<const Grid>(
      axes, [bounds](const State& x) { return bounds.contains(x, 1e-12); });

  QuadratureConfig q = cfg.quadrature;
  if (!cfg.horizon_given) q.horizon = default_horizon;

  Instance inst{base, *base_flow, grid, std::nullopt, sir_params, std::nullopt, q, {}};
  if (m.alpha) {
    discount::DiscountedModel dm = discount::wrap_discounted(base, *base_flow, *m.alpha);
    inst.model = dm.model;
    inst.flow = dm.flow;
    inst.embedding = discount::time_slice(*m.alpha, d);
    inst.warnings = dm.warnings;
    inst.discounted = std::move(dm);
  }
  return inst;
}

}  // namespace impulse
