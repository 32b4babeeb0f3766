#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "impulse/bellman.hpp"
#include "impulse/config.hpp"
#include "impulse/csv.hpp"
#include "impulse/figures.hpp"
#include "impulse/sim.hpp"
#include "impulse/sir.hpp"
#include "impulse/verify.hpp"
#include "json.hpp"

#ifndef IMPULSE_GIT_HASH
#define IMPULSE_GIT_HASH "unknown"
#endif

namespace impulse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Config file plus overrides, the instantiated model and the output dir.
struct Run {
  Clock::time_point start;
  RunConfig cfg;
  Instance inst;
  fs::path out;
};

RunConfig with_overrides(RunConfig cfg, const Overrides& o) {
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.solve.workers = *o.workers;
  if (cfg.solve.workers == 0) throw ConfigError("'solve.workers' must be >= 1");
  return cfg;
}

Run prepare(const std::string& config_path, const Overrides& o) {
  const auto t0 = Clock::now();
  RunConfig cfg = with_overrides(load_config(config_path), o);
  Instance inst = instantiate(cfg);
  Run r{t0, std::move(cfg), std::move(inst), {}};
  for (const auto& w : r.inst.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  r.out = r.cfg.output_dir;
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw Error("cannot create output directory " + r.out.string() + ": " + ec.message());
  return r;
}

BellmanProblem problem_of(const Run& r) { return BellmanProblem{r.inst.model, r.inst.flow, 0.0}; }

json point_json(const State& x) {
  json a = json::array();
  for (double c : x.coords()) a.push_back(c);
  return a;
}

// JSON has no infinity; non-finite numbers go out as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return csv::format(v);
}

void write_summary(const Run& r, const std::string& command, json results) {
  json s;
  s["command"] = command;
  s["git_hash"] = IMPULSE_GIT_HASH;
  s["config"] = json::parse(config_to_json(r.cfg));
  s["warnings"] = r.inst.warnings;
  s["results"] = std::move(results);
  s["timings"] = {{"total_seconds", seconds_since(r.start)}};
  const fs::path path = r.out / (command + "_summary.json");
  std::ofstream f(path);
  f << s.dump(2) << '\n';
  if (!f) throw Error("cannot write " + path.string());
}

SolveOptions solve_options(const Run& r) {
  SolveOptions opts;
  opts.tol = r.cfg.solve.tol;
  opts.max_iter = r.cfg.solve.max_iter;
  opts.workers = r.cfg.solve.workers;
  if (r.cfg.solve.initial == "stop") {
    opts.initial = stopping_field(problem_of(r), *r.inst.grid, r.inst.quadrature, r.inst.embedding);
  }
  return opts;
}

void write_strategy_csv(const std::string& path, const Grid& grid,
                        const std::vector<BackupResult>& policy) {
  csv::Writer w(path);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < grid.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  header.insert(header.end(), {"theta_star", "action"});
  w.row(header);
  for (std::size_t node : grid.masked()) {
    const State x = grid.point(node);
    std::vector<std::string> cells;
    for (std::size_t k = 0; k < grid.dim(); ++k) cells.push_back(csv::format(x[k]));
    const BackupResult& b = policy[node];
    cells.push_back(b.theta.is_infinite() ? "inf" : csv::format(b.theta.value()));
    cells.push_back(std::to_string(b.action.id));
    w.row(cells);
  }
  w.close();
}

void write_iterations_json(const std::string& path, const SolveResult& res) {
  json arr = json::array();
  for (const IterationReport& it : res.reports) {
    arr.push_back({{"n", it.n},
                   {"sup_change", num(it.sup_change)},
                   {"monotone_ok", it.monotone_ok},
                   {"monotone_violations", it.monotone_violations},
                   {"wall_time", it.wall_time}});
  }
  json j{{"converged", res.converged}, {"monotone_ok", res.monotone_ok}, {"iterations", arr}};
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw Error("cannot write " + path);
}

json solve_outputs(const Run& r, const SolveResult& res) {
  const std::string field = (r.out / "value_field.csv").string();
  csv::write_value_field(field, res.field, res.policy);
  write_strategy_csv((r.out / "strategy.csv").string(), res.field.grid(), res.policy);
  write_iterations_json((r.out / "iterations.json").string(), res);
  return {{"converged", res.converged},
          {"iterations", res.reports.size()},
          {"final_sup_change", res.reports.empty() ? json(nullptr) : num(res.reports.back().sup_change)},
          {"monotone_ok", res.monotone_ok},
          {"nodes", res.field.grid().masked_count()},
          {"value_field", field}};
}

ValueField load_field(const Run& r) {
  const fs::path path =
      r.cfg.verify.field.empty() ? r.out / "value_field.csv" : fs::path(r.cfg.verify.field);
  if (!fs::exists(path)) throw ConfigError("value field file not found: " + path.string());
  return ValueField(r.inst.grid, csv::read_value_field(path.string(), *r.inst.grid),
                    r.inst.embedding);
}

const sir::SirParams& require_sir(const Run& r, const std::string& what) {
  if (!r.inst.sir || r.inst.discounted) {
    throw ConfigError(what + " needs the undiscounted 'sir' model");
  }
  return *r.inst.sir;
}

// Starting states: explicit ones, then `random` uniform draws inside X.
std::vector<State> start_states(const Run& r, const std::vector<State>& given, std::size_t random) {
  const ImpulseModel& base = r.inst.discounted ? r.inst.discounted->base : r.inst.model;
  std::vector<State> out;
  for (const State& x : given) {
    if (x.dim() != base.dim()) {
      throw ConfigError("initial state " + to_string(x) + " has the wrong dimension");
    }
    if (!base.bounds.contains(x, 1e-12)) {
      throw ConfigError("initial state " + to_string(x) + " lies outside the state space");
    }
    out.push_back(x);
  }
  std::mt19937_64 rng(r.cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t drawn = 0;
  while (drawn < random) {
    State x = State::zeros(base.dim());
    for (std::size_t k = 0; k < base.dim(); ++k) {
      x[k] = base.bounds.lower[k] + unit(rng) * (base.bounds.upper[k] - base.bounds.lower[k]);
    }
    if (!base.bounds.contains(x, 0.0)) continue;
    out.push_back(x);
    ++drawn;
  }
  if (out.empty()) throw ConfigError("'simulate' needs initial_states or random_states");
  return out;
}

State lift(const Run& r, const State& y) { return r.inst.embedding ? r.inst.embedding->lift(y) : y; }

}  // namespace

int cmd_solve(const std::string& config_path, const Overrides& o) {
  Run r = prepare(config_path, o);
  const BellmanProblem problem = problem_of(r);
  const SolveOptions opts = solve_options(r);
  try {
    const SolveResult res = value_iteration(problem, r.inst.grid, r.cfg.theta, r.inst.quadrature,
                                            opts, r.inst.embedding);
    json results = solve_outputs(r, res);
    write_summary(r, "solve", results);
    std::printf("converged after %zu sweeps (sup change %.3g)\n", res.reports.size(),
                res.reports.back().sup_change);
    return kOk;
  } catch (const NonConvergenceError& e) {
    json results = solve_outputs(r, e.partial());
    results["error"] = e.what();
    write_summary(r, "solve", results);
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNonConvergence;
  }
}

int cmd_verify(const std::string& config_path, const std::string& source, const Overrides& o) {
  Run r = prepare(config_path, o);
  const BellmanProblem problem = problem_of(r);
  const bool analytic = source == "analytic";
  if (!analytic && source != "numeric") throw ConfigError("--source must be numeric or analytic");

  DifEqMargins m;
  m.forward = r.cfg.verify.forward_margin.value_or(analytic ? 1e-3 : 5e-2);
  m.gap = r.cfg.verify.gap_margin.value_or(analytic ? 1e-6 : 1e-3);
  m.exclusion_cells = r.cfg.verify.exclusion_cells.value_or(analytic ? 2 : 3);
  m.generator.h = r.cfg.verify.gen_h;
  m.generator.gen_tol = r.cfg.verify.gen_tol;

  ValueFn V;
  json results;
  if (analytic) {
    const sir::SirParams p = require_sir(r, "--source analytic");
    V = [p](const State& x) { return sir::analytic_value(p, x); };
  } else {
    const ValueField field = load_field(r);
    const std::vector<double> res = bellman_residual(problem, field, r.cfg.theta,
                                                     r.inst.quadrature, r.cfg.solve.workers);
    double worst = 0.0;
    for (std::size_t node : field.grid().masked()) worst = std::max(worst, res[node]);
    results["integral_residual"] = num(worst);
    results["integral_residual_ok"] = worst <= 3.0 * r.cfg.solve.tol;
    V = bellman_extension(problem, field, r.cfg.theta, r.inst.quadrature, r.cfg.solve.workers);
  }

  LiftFn lift_fn;
  if (r.inst.embedding) lift_fn = r.inst.embedding->lift;
  const DifEqReport rep = check_differential_form(V, r.inst.flow, r.inst.model, *r.inst.grid, m,
                                                  r.inst.quadrature, r.cfg.solve.workers, lift_fn);
  write_verdicts_csv((r.out / "verdicts.csv").string(), rep, r.inst.grid->dim());

  results["source"] = source;
  results["margins"] = {{"forward", m.forward}, {"gap", m.gap}, {"exclusion_cells", m.exclusion_cells}};
  results["checked"] = rep.verdicts.size();
  results["excluded"] = rep.excluded;
  results["case_a"] = rep.case_a;
  results["case_b"] = rep.case_b;
  results["singular"] = rep.singular;
  results["violations"] = rep.violations;
  results["worst_forward_residual"] = num(rep.worst_forward);
  results["worst_gap_on_l"] = num(rep.worst_gap);
  results["min_backward_on_l"] = num(rep.min_backward);
  write_summary(r, "verify", results);
  std::printf("%zu checked, %zu excluded, case A %zu, case B %zu, violations %zu\n",
              rep.verdicts.size(), rep.excluded, rep.case_a, rep.case_b, rep.violations);
  return rep.violations == 0 ? kOk : kViolations;
}

int cmd_simulate(const std::string& config_path, const Overrides& o) {
  Run r = prepare(config_path, o);
  const SimulateSpec& s = r.cfg.simulate;
  const std::vector<State> starts = start_states(r, s.initial_states, s.random_states);

  StationaryStrategy strategy;
  std::optional<sir::SirParams> sir_p;
  if (s.strategy == "analytic") {
    sir_p = require_sir(r, "strategy 'analytic'");
    strategy = sir::analytic_optimal_strategy(*sir_p);
  } else if (s.strategy == "threshold") {
    sir_p = require_sir(r, "strategy 'threshold'");
    strategy = sir::threshold_strategy(*sir_p, s.slope);
  } else if (s.strategy == "numeric") {
    const ValueField field = load_field(r);
    strategy = extract_strategy(problem_of(r), field, r.cfg.theta, r.inst.quadrature,
                                r.cfg.solve.workers)
                   .strategy;
  } else if (s.strategy == "stop") {
    strategy = stop_strategy();
  } else {
    strategy = impulse_now_strategy();
  }
  if (!sir_p && r.inst.sir && !r.inst.discounted) sir_p = r.inst.sir;

  SimCaps caps;
  caps.max_impulses = s.max_impulses;
  caps.horizon = s.horizon;
  const fs::path dir = r.out / "trajectories";
  fs::create_directories(dir);
  const std::size_t dim = r.inst.model.dim();

  json runs = json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Trajectory t =
        simulate(r.inst.model, r.inst.flow, strategy, lift(r, starts[i]), caps, r.inst.quadrature);
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%03zu.csv", i);
    write_trajectory_csv((dir / name).string(), t, dim);
    json entry{{"file", std::string("trajectories/") + name},
               {"start", point_json(starts[i])},
               {"total_cost", num(t.total_cost)},
               {"impulses", t.impulses.size()},
               {"terminated", to_string(t.terminated)}};
    if (sir_p) entry["analytic_value"] = sir::analytic_value(*sir_p, starts[i]);
    runs.push_back(entry);
  }
  write_summary(r, "simulate", {{"strategy", s.strategy}, {"runs", runs}});
  std::printf("simulated %zu trajectories under '%s'\n", starts.size(), s.strategy.c_str());
  return kOk;
}

int cmd_figures(const std::string& config_path, const Overrides& o) {
  Run r = prepare(config_path, o);
  const sir::SirParams p = require_sir(r, "figures");
  const std::vector<State> starts =
      r.cfg.figures.initial_states.empty()
          ? sir::figure_lattice(p, r.cfg.figures.lattice)
          : start_states(r, r.cfg.figures.initial_states, 0);
  const auto entries = sir::emit_figure_data(p, starts, (r.out / "figures").string(), r.inst.quadrature);

  std::size_t impulses = 0;
  for (const auto& e : entries) impulses += e.impulses;
  const sir::Regime reg = sir::classify(p);
  json results{{"regime", sir::to_string(reg.tag)},
               {"trajectories", entries.size()},
               {"impulses", impulses},
               {"directory", (r.out / "figures").string()}};
  results["threshold_slope"] = reg.threshold_slope ? json(*reg.threshold_slope) : json(nullptr);
  write_summary(r, "figures", results);
  std::printf("wrote %zu trajectories (%zu impulses) to %s\n", entries.size(), impulses,
              (r.out / "figures").string().c_str());
  return kOk;
}

int cmd_regime(const std::string& config_path, const Overrides& o) {
  Run r = prepare(config_path, o);
  const sir::SirParams p = require_sir(r, "regime");
  const sir::Regime reg = sir::classify(p);
  json results{{"regime", sir::to_string(reg.tag)},
               {"beta", p.beta},
               {"gamma", p.gamma},
               {"c", p.c},
               {"N", p.N}};
  results["threshold_slope"] = reg.threshold_slope ? json(*reg.threshold_slope) : json(nullptr);
  if (reg.tag == sir::RegimeTag::kSupercritical) {
    results["zeta_limit"] = sir::gradual_threshold(p, 1e8, sir::GradualKind::kZeta);
  } else if (reg.tag == sir::RegimeTag::kSubcriticalCheap) {
    results["xi_limit"] = sir::gradual_threshold(p, 1e8, sir::GradualKind::kXi);
  }
  write_summary(r, "regime", results);
  std::printf("%s\n", results.dump(2).c_str());
  return kOk;
}

}  // namespace impulse::cli
