#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "impulse/core.hpp"
#include "impulse/flow.hpp"
#include "impulse/grid.hpp"

namespace impulse {

/// Discretisation of the infimum over theta in [0, inf]: a log-spaced grid on
/// [t_min_ratio * t_max, t_max] plus 0 and INFINITY, then a golden-section
/// refinement in the bracket around the best finite candidate.
struct ThetaSearchConfig {
  std::size_t count = 64;
  /// Largest finite candidate; 0 means "use the quadrature horizon".
  double t_max = 0.0;
  double t_min_ratio = 1e-6;
  std::size_t refine_iterations = 60;
  /// Candidates within tie_tol * (1 + |min|) of the minimum are ties.
  double tie_tol = 1e-7;

  void validate() const;
  /// Sorted positive candidates (without 0 and INFINITY).
  std::vector<double> candidates(const QuadratureConfig& q) const;
};

/// A backup problem: the model, its flow and an optional exponential
/// discount rate applied along the path (0 for the total-cost criterion).
struct BellmanProblem {
  const ImpulseModel& model;
  const FlowSpec& flow;
  double discount = 0.0;
};

struct BackupResult {
  double value = 0.0;
  WaitTime theta = WaitTime::infinite();
  Action action{};
};

/// The parts of a backup at a fixed state that do not depend on V: the
/// theta candidates reachable inside the state space, the running cost up
/// to each of them, the states phi(x, theta_k), the impulse targets and
/// costs there, and the stopping value.
struct NodeProfile {
  State x;
  std::vector<double> theta;    ///< theta[0] = 0
  std::vector<double> run;      ///< discounted running cost over (0, theta_k]
  std::vector<double> weight;   ///< exp(-discount * theta_k)
  std::vector<State> pos;       ///< phi(x, theta_k)
  std::vector<double> impulse_cost;  ///< [k * |A| + a]
  std::vector<State> target;         ///< [k * |A| + a]
  double stop = 0.0;
  bool truncated = false;  ///< flow left the state space before t_max
};

NodeProfile build_profile(const BellmanProblem& problem, const State& x,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q);

/// One candidate of the theta search with its value.
struct Candidate {
  WaitTime theta;
  double value;
  Action action;
};

/// inf_a [C^I(x,a) + V(l(x,a))] with the smallest minimizing action id.
std::pair<double, Action> impulse_value(const ImpulseModel& model, const ValueFn& V,
                                        const State& x);

/// Backup from a precomputed profile. When `trace` is given it receives all
/// evaluated candidates sorted by theta (INFINITY last).
BackupResult backup(const BellmanProblem& problem, const NodeProfile& profile, const ValueFn& V,
                    const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                    std::vector<Candidate>* trace = nullptr);

/// min over theta in [0, inf] of the stage cost plus the continuation, with
/// the smallest minimizing theta.
BackupResult bellman_backup(const BellmanProblem& problem, const ValueFn& V, const State& x,
                            const ThetaSearchConfig& cfg, const QuadratureConfig& q);

/// Candidates whose backup value is within eps of the minimum. A tied run
/// that reaches INFINITY without starting at 0 is reported as INFINITY alone.
std::vector<WaitTime> theta_set(const BellmanProblem& problem, const ValueFn& V, const State& x,
                                const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                double eps);

struct IterationReport {
  std::size_t n = 0;
  double sup_change = 0.0;
  bool monotone_ok = true;
  std::size_t monotone_violations = 0;
  double wall_time = 0.0;  ///< seconds
};

struct SolveOptions {
  double tol = 1e-4;
  std::size_t max_iter = 200;
  std::size_t workers = 1;
  /// Starting field; zero when absent (the successive-approximation start).
  std::optional<std::vector<double>> initial;
  /// Check V_{n+1} >= V_n - 1e-9 (1 + |V_n|) each sweep.
  bool check_monotone = true;
};

struct SolveResult {
  ValueField field;
  std::vector<IterationReport> reports;
  std::vector<BackupResult> policy;  ///< per grid node (unmasked entries unused)
  bool converged = false;
  bool monotone_ok = true;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, SolveResult partial)
      : Error(what), partial_(std::make_shared<SolveResult>(std::move(partial))) {}
  const SolveResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<SolveResult> partial_;
};

/// Successive approximations V_{n+1} = backup(V_n) on the masked nodes
/// (Jacobi sweeps, node-parallel over `workers` threads). Throws
/// NonConvergenceError after max_iter sweeps without sup_change <= tol.
SolveResult value_iteration(const BellmanProblem& problem, std::shared_ptr<const Grid> grid,
                            const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                            const SolveOptions& opts,
                            std::optional<SliceEmbedding> embedding = std::nullopt);

/// Stopping value at every masked node (an alternative start V_0).
std::vector<double> stopping_field(const BellmanProblem& problem, const Grid& grid,
                                   const QuadratureConfig& q,
                                   const std::optional<SliceEmbedding>& embedding = std::nullopt);

/// |backup(V)(x) - V(x)| at every masked node, as a vector over grid nodes.
std::vector<double> bellman_residual(const BellmanProblem& problem, const ValueField& V,
                                     const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                     std::size_t workers = 1);

/// Stationary strategy from a converged field: node table plus a direct
/// backup at off-node queries.
struct ExtractedStrategy {
  std::vector<BackupResult> nodes;  ///< per grid node
  StationaryStrategy strategy;
};

ExtractedStrategy extract_strategy(const BellmanProblem& problem, const ValueField& V,
                                   const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                                   std::size_t workers = 1);

/// Off-grid extension of a node field through one backup:
/// y -> B[V](y) + interp(V - B[V])(y). Equal to V at the nodes; between them
/// it is as smooth as the backup rather than the piecewise-linear interpolant.
ValueFn bellman_extension(const BellmanProblem& problem, const ValueField& V,
                          const ThetaSearchConfig& cfg, const QuadratureConfig& q,
                          std::size_t workers = 1);

/// Runs fn(i) for i in [0, n) split over `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace impulse
