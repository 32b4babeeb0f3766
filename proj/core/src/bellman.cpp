#include "impulse/bellman.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace impulse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

using Clock = std::chrono::steady_clock;

PathRate discounted_rate(const ImpulseModel& model, double discount, double shift) {
  const auto& cg = model.gradual_cost;
  if (discount == 0.0) return [&cg](const State& y, double) { return cg(y); };
  return [&cg, discount, shift](const State& y, double u) {
    return std::exp(-discount * (shift + u)) * cg(y);
  };
}

// min_a [C^I(y,a) + V(l(y,a))] without the state-space check on l (the
// profile already validated targets on the candidate grid).
std::pair<double, Action> best_impulse(const ImpulseModel& model, const ValueFn& V,
                                       const State& y) {
  double best = kInf;
  Action arg{0};
  for (std::size_t a = 0; a < model.action_count; ++a) {
    const double v = model.impulse_cost(y, Action{a}) + V(model.jump(y, Action{a}));
    if (v < best) {
      best = v;
      arg = Action{a};
    }
  }
  return {best, arg};
}

// Smallest minimizing theta among candidates sorted by theta, except that a
// tie block running up to INFINITY and not starting at 0 is read as INFINITY.
BackupResult choose(const std::vector<Candidate>& sorted, const ThetaSearchConfig& cfg) {
  double m = kInf;
  for (const Candidate& c : sorted) m = std::min(m, c.value);
  if (!std::isfinite(m)) throw DomainError("backup: every candidate has an infinite value");
  const double tol = cfg.tie_tol * (1.0 + std::abs(m));
  std::size_t first = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].value <= m + tol) {
      first = i;
      break;
    }
  }
  std::size_t last = first;
  while (last + 1 < sorted.size() && sorted[last + 1].value <= m + tol) ++last;
  const Candidate& f = sorted[first];
  const bool reaches_stop = last + 1 == sorted.size() && sorted.back().theta.is_infinite();
  const bool starts_at_zero = f.theta.is_finite() && f.theta.value() == 0.0;
  if (reaches_stop && !starts_at_zero) return {m, WaitTime::infinite(), Action{0}};
  return {m, f.theta, f.action};
}

}  // namespace

void ThetaSearchConfig::validate() const {
  if (count < 2) throw ConfigError("theta_search.count must be >= 2");
  if (t_max < 0.0 || !std::isfinite(t_max)) throw ConfigError("theta_search.t_max must be >= 0");
  if (!(t_min_ratio > 0.0 && t_min_ratio < 1.0)) {
    throw ConfigError("theta_search.t_min_ratio must be in (0, 1)");
  }
  if (!(tie_tol >= 0.0)) throw ConfigError("theta_search.tie_tol must be >= 0");
}

std::vector<double> ThetaSearchConfig::candidates(const QuadratureConfig& q) const {
  const double hi = t_max > 0.0 ? t_max : q.horizon;
  const double lo = hi * t_min_ratio;
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

NodeProfile build_profile(const BellmanProblem& problem, const State& x,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q) {
  const ImpulseModel& model = problem.model;
  if (!model.contains(x)) throw DomainError("backup state outside the state space: " + to_string(x));
  const std::size_t na = model.action_count;
  NodeProfile p;
  p.x = x;
  p.theta.push_back(0.0);
  p.run.push_back(0.0);
  p.weight.push_back(1.0);
  p.pos.push_back(x);
  for (std::size_t a = 0; a < na; ++a) {
    p.impulse_cost.push_back(model.impulse_cost(x, Action{a}));
    p.target.push_back(apply_impulse(model, x, Action{a}));
  }

  const bool closed = problem.flow.kind() == FlowSpec::Kind::kClosedForm;
  for (double t : cfg.candidates(q)) {
    const double prev_t = p.theta.back();
    const State& prev = p.pos.back();
    State y;
    double piece = 0.0;
    try {
      y = closed ? problem.flow.advance(x, t) : problem.flow.advance(prev, t - prev_t);
      if (!model.contains(y)) {
        p.truncated = true;
        break;
      }
      piece = path_integral(problem.flow, discounted_rate(model, problem.discount, prev_t), prev,
                            0.0, t - prev_t, q);
    } catch (const DomainError&) {
      p.truncated = true;
      break;
    }
    p.theta.push_back(t);
    p.run.push_back(p.run.back() + piece);
    p.weight.push_back(std::exp(-problem.discount * t));
    p.pos.push_back(y);
    for (std::size_t a = 0; a < na; ++a) {
      p.impulse_cost.push_back(model.impulse_cost(y, Action{a}));
      p.target.push_back(apply_impulse(model, y, Action{a}));
    }
  }

  if (model.in_cemetery(x)) {
    p.stop = 0.0;
  } else {
    try {
      p.stop = path_integral_to_infinity(problem.flow,
                                         discounted_rate(model, problem.discount, 0.0), x, q);
    } catch (const DomainError&) {
      p.stop = kInf;  // the uncontrolled flow leaves X: stopping is not admissible
    }
  }
  return p;
}

std::pair<double, Action> impulse_value(const ImpulseModel& model, const ValueFn& V,
                                        const State& x) {
  double best = kInf;
  Action arg{0};
  for (std::size_t a = 0; a < model.action_count; ++a) {
    const Action act{a};
    const double v = model.impulse_cost(x, act) + V(apply_impulse(model, x, act));
    if (v < best) {
      best = v;
      arg = act;
    }
  }
  return {best, arg};
}

BackupResult backup(const BellmanProblem& problem, const NodeProfile& p, const ValueFn& V,
                    const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                    std::vector<Candidate>* trace) {
  const ImpulseModel& model = problem.model;
  const std::size_t na = model.action_count;
  const std::size_t nk = p.theta.size();

  std::vector<Candidate> cands;
  cands.reserve(nk + 2);
  std::size_t best_k = 0;
  double best_v = kInf;
  for (std::size_t k = 0; k < nk; ++k) {
    double imp = kInf;
    Action arg{0};
    for (std::size_t a = 0; a < na; ++a) {
      const double v = p.impulse_cost[k * na + a] + V(p.target[k * na + a]);
      if (v < imp) {
        imp = v;
        arg = Action{a};
      }
    }
    const double g = p.run[k] + p.weight[k] * imp;
    cands.push_back({WaitTime::finite(p.theta[k]), g, arg});
    if (g < best_v) {
      best_v = g;
      best_k = k;
    }
  }

  // Golden-section refinement around the best positive candidate.
  if (best_k >= 1 && cfg.refine_iterations > 0) {
    const std::size_t k0 = best_k - 1;
    const double t0 = p.theta[k0];
    const double t1 = p.theta[std::min(best_k + 1, nk - 1)];
    const State& base = p.pos[k0];
    const PathRate rate = discounted_rate(model, problem.discount, t0);
    Candidate refined{WaitTime::finite(p.theta[best_k]), best_v, cands[best_k].action};
    auto eval = [&](double t) {
      const double dt = t - t0;
      const State y = problem.flow.advance(base, dt);
      const double run = p.run[k0] + path_integral(problem.flow, rate, base, 0.0, dt, q);
      const auto [imp, arg] = best_impulse(model, V, y);
      const double g = run + std::exp(-problem.discount * t) * imp;
      if (g < refined.value) refined = {WaitTime::finite(t), g, arg};
      return g;
    };
    double a = t0;
    double b = t1;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    try {
      double fc = eval(c);
      double fd = eval(d);
      for (std::size_t it = 0; it < cfg.refine_iterations && (b - a) > 1e-12 * b; ++it) {
        if (fc <= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - kGolden * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + kGolden * (b - a);
          fd = eval(d);
        }
      }
    } catch (const DomainError&) {
      // Refinement left the state space; keep the grid candidates.
    }
    const double rt = refined.theta.value();
    if (rt != p.theta[best_k]) {
      const auto pos = std::lower_bound(cands.begin(), cands.end(), rt, [](const Candidate& c, double t) {
        return c.theta.value() < t;
      });
      cands.insert(pos, refined);
    }
  }

  cands.push_back({WaitTime::infinite(), p.stop, Action{0}});
  BackupResult r = choose(cands, cfg);
  if (trace) *trace = std::move(cands);
  return r;
}

BackupResult bellman_backup(const BellmanProblem& problem, const ValueFn& V, const State& x,
                            const ThetaSearchConfig& cfg, const QuadratureConfig& q) {
  const NodeProfile p = build_profile(problem, x, cfg, q);
  return backup(problem, p, V, cfg, q);
}

std::vector<WaitTime> theta_set(const BellmanProblem& problem, const ValueFn& V, const State& x,
                                const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                double eps) {
  const NodeProfile p = build_profile(problem, x, cfg, q);
  std::vector<Candidate> trace;
  const BackupResult r = backup(problem, p, V, cfg, q, &trace);
  std::vector<char> tied(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) tied[i] = trace[i].value <= r.value + eps;
  // A tied run ending at INFINITY only approaches the stopping value
  // asymptotically; it stands for INFINITY alone unless it starts at 0.
  std::size_t tail = trace.size();
  while (tail > 0 && tied[tail - 1]) --tail;
  const bool merge = tail < trace.size() && tail > 0 && trace.back().theta.is_infinite();
  std::vector<WaitTime> out;
  for (std::size_t i = 0; i < (merge ? tail : trace.size()); ++i) {
    if (tied[i]) out.push_back(trace[i].theta);
  }
  if (merge) out.push_back(WaitTime::infinite());
  return out;
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t t = std::min(workers, n);
  for (std::size_t i = 0; i + 1 < t; ++i) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<NodeProfile> build_profiles(const BellmanProblem& problem, const Grid& grid,
                                        const std::optional<SliceEmbedding>& embedding,
                                        const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                        std::size_t workers) {
  const auto& nodes = grid.masked();
  std::vector<NodeProfile> profiles(nodes.size());
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    const State p = grid.point(nodes[i]);
    profiles[i] = build_profile(problem, embedding ? embedding->lift(p) : p, cfg, q);
  });
  return profiles;
}

}  // namespace

SolveResult value_iteration(const BellmanProblem& problem, std::shared_ptr<const Grid> grid,
                            const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                            const SolveOptions& opts, std::optional<SliceEmbedding> embedding) {
  cfg.validate();
  q.validate();
  if (!(opts.tol > 0.0)) throw ConfigError("solve.tol must be > 0");
  if (opts.max_iter == 0) throw ConfigError("solve.max_iter must be >= 1");

  const auto& nodes = grid->masked();
  const std::vector<NodeProfile> profiles =
      build_profiles(problem, *grid, embedding, cfg, q, opts.workers);

  std::vector<double> start = opts.initial ? *opts.initial : std::vector<double>(grid->size(), 0.0);
  SolveResult result{ValueField(grid, std::move(start), embedding), {}, {}, false, true};
  result.policy.assign(grid->size(), BackupResult{});

  for (std::size_t n = 1; n <= opts.max_iter; ++n) {
    const auto t_start = Clock::now();
    const ValueField& current = result.field;
    const ValueFn V = [&current](const State& x) { return current(x); };
    std::vector<double> next = current.values();
    std::vector<BackupResult> sweep(nodes.size());
    parallel_for(nodes.size(), opts.workers, [&](std::size_t i) {
      sweep[i] = backup(problem, profiles[i], V, cfg, q);
    });

    IterationReport rep;
    rep.n = n;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::size_t node = nodes[i];
      const double old = current.values()[node];
      const double v = sweep[i].value;
      rep.sup_change = std::max(rep.sup_change, std::abs(v - old));
      if (opts.check_monotone && v < old - 1e-9 * (1.0 + std::abs(old))) {
        rep.monotone_ok = false;
        ++rep.monotone_violations;
      }
      next[node] = v;
      result.policy[node] = sweep[i];
    }
    result.field.assign(std::move(next));
    result.field.set_version(n);
    rep.wall_time = std::chrono::duration<double>(Clock::now() - t_start).count();
    result.monotone_ok = result.monotone_ok && rep.monotone_ok;
    result.reports.push_back(rep);
    if (rep.sup_change <= opts.tol) {
      result.converged = true;
      return result;
    }
  }
  const double last = result.reports.back().sup_change;
  throw NonConvergenceError("value iteration did not reach tol " + std::to_string(opts.tol) +
                                " in " + std::to_string(opts.max_iter) +
                                " sweeps (last sup change " + std::to_string(last) + ")",
                            std::move(result));
}

std::vector<double> stopping_field(const BellmanProblem& problem, const Grid& grid,
                                   const QuadratureConfig& q,
                                   const std::optional<SliceEmbedding>& embedding) {
  std::vector<double> out(grid.size(), 0.0);
  const PathRate rate = discounted_rate(problem.model, problem.discount, 0.0);
  for (std::size_t node : grid.masked()) {
    const State p = grid.point(node);
    const State x = embedding ? embedding->lift(p) : p;
    out[node] = problem.model.in_cemetery(x)
                    ? 0.0
                    : path_integral_to_infinity(problem.flow, rate, x, q);
  }
  return out;
}

std::vector<double> bellman_residual(const BellmanProblem& problem, const ValueField& V,
                                     const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                     std::size_t workers) {
  const Grid& grid = V.grid();
  const auto& nodes = grid.masked();
  const ValueFn fn = [&V](const State& x) { return V(x); };
  std::vector<double> out(grid.size(), 0.0);
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    const std::size_t node = nodes[i];
    const BackupResult r = bellman_backup(problem, fn, V.node_state(node), cfg, q);
    out[node] = std::abs(r.value - V.values()[node]);
  });
  return out;
}

ExtractedStrategy extract_strategy(const BellmanProblem& problem, const ValueField& V,
                                   const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                   std::size_t workers) {
  const Grid& grid = V.grid();
  const auto& nodes = grid.masked();
  const ValueFn fn = [&V](const State& x) { return V(x); };
  ExtractedStrategy out;
  out.nodes.assign(grid.size(), BackupResult{});
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    out.nodes[nodes[i]] = bellman_backup(problem, fn, V.node_state(nodes[i]), cfg, q);
  });

  // Off-node queries run a fresh backup against a private copy of everything.
  struct Context {
    ImpulseModel model;
    FlowSpec flow;
    double discount;
    ValueField field;
    ThetaSearchConfig cfg;
    QuadratureConfig q;
  };
  auto ctx = std::make_shared<Context>(
      Context{problem.model, problem.flow, problem.discount, V, cfg, q});
  auto query = [ctx](const State& x) {
    const BellmanProblem pb{ctx->model, ctx->flow, ctx->discount};
    const ValueFn v = [ctx](const State& y) { return ctx->field(y); };
    return bellman_backup(pb, v, x, ctx->cfg, ctx->q);
  };
  out.strategy.wait = [query](const State& x) { return query(x).theta; };
  out.strategy.act = [query](const State& x) { return query(x).action; };
  return out;
}

ValueFn bellman_extension(const BellmanProblem& problem, const ValueField& V,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                          std::size_t workers) {
  struct Context {
    ImpulseModel model;
    FlowSpec flow;
    double discount;
    ValueField field;
    ValueField correction;
    ThetaSearchConfig cfg;
    QuadratureConfig q;
  };
  const Grid& grid = V.grid();
  const auto& nodes = grid.masked();
  const ValueFn fn = [&V](const State& x) { return V(x); };
  std::vector<double> diff(grid.size(), 0.0);
  parallel_for(nodes.size(), workers, [&](std::size_t i) {
    const std::size_t node = nodes[i];
    diff[node] = V.values()[node] - bellman_backup(problem, fn, V.node_state(node), cfg, q).value;
  });
  auto ctx = std::make_shared<Context>(
      Context{problem.model, problem.flow, problem.discount, V,
              ValueField(V.grid_ptr(), std::move(diff), V.embedding()), cfg, q});
  return [ctx](const State& x) {
    const BellmanProblem pb{ctx->model, ctx->flow, ctx->discount};
    const ValueFn v = [ctx](const State& y) { return ctx->field(y); };
    return bellman_backup(pb, v, x, ctx->cfg, ctx->q).value + ctx->correction(x);
  };
}

}  // namespace impulse
