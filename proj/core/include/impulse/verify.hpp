#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "impulse/bellman.hpp"
#include "impulse/core.hpp"
#include "impulse/flow.hpp"
#include "impulse/grid.hpp"

namespace impulse {

/// Finite-difference settings for the generators. Estimates use h, h/2, h/4
/// and two levels of Richardson extrapolation; the limit is declared absent
/// when the two first-level extrapolants differ by more than gen_tol.
struct GeneratorConfig {
  double h = 1e-3;
  double gen_tol = 1e-3;
  /// If > 0, h is halved until |phi(x,h) - x|_inf <= max_displacement.
  double max_displacement = 0.0;
  std::size_t preimage_iterations = 200;
};

struct GeneratorEstimate {
  std::optional<double> forward;
  std::optional<double> backward;
  double h = 0.0;
  /// No incoming trajectory inside X (the backward condition holds vacuously).
  bool singular = false;
};

/// Forward generator: lim [exp(-discount h) V(phi(x,h)) - V(x)]/h
///   + (1/h) int_0^h exp(-discount u) C^g(phi(x,u)) du.
std::optional<double> forward_generator(const ValueFn& V, const FlowSpec& flow,
                                        const ImpulseModel& model, const State& x,
                                        const GeneratorConfig& g, const QuadratureConfig& q,
                                        double discount = 0.0);

/// Backward generator along the flow's own history: finds x~ with
/// phi(x~, h) = x by forward advances only and differences
/// [V(x) - V(x~)]/h + (1/h) int_0^h C^g(phi(x~,u)) du.
GeneratorEstimate backward_generator(const ValueFn& V, const FlowSpec& flow,
                                     const ImpulseModel& model, const State& x,
                                     const GeneratorConfig& g, const QuadratureConfig& q);

GeneratorEstimate generator_estimate(const ValueFn& V, const FlowSpec& flow,
                                     const ImpulseModel& model, const State& x,
                                     const GeneratorConfig& g, const QuadratureConfig& q);

/// inf_a [C^I(x,a) + V(l(x,a))] - V(x).
double impulse_gap(const ImpulseModel& model, const ValueFn& V, const State& x);

enum class DifEqCase { kA, kB, kViolation };
std::string to_string(DifEqCase c);

struct DifEqVerdict {
  DifEqCase kase = DifEqCase::kViolation;
  double forward_residual = 0.0;  ///< |forward generator|; +inf when absent
  double impulse_gap = 0.0;
  std::optional<double> backward;
  bool singular = false;
  State location;
  std::size_t node = 0;
};

struct DifEqMargins {
  double forward = 1e-3;   ///< case A: |F+| <= forward; case B: F- >= -forward
  double gap = 1e-6;       ///< |gap| <= gap means "on L"
  std::size_t exclusion_cells = 2;
  GeneratorConfig generator;
};

/// Case A (gap > margin, F+ ~ 0) or case B (gap ~ 0, F- >= 0) at one point.
DifEqVerdict classify_point(const ValueFn& V, const FlowSpec& flow, const ImpulseModel& model,
                            const State& x, const DifEqMargins& m, const QuadratureConfig& q);

/// Maps grid points to model states when the grid covers a slice.
using LiftFn = std::function<State(const State&)>;

/// Nodes whose impulse gap is <= margin. Indexed by grid node (0 outside the mask).
std::vector<char> intervention_set(const ImpulseModel& model, const ValueFn& V, const Grid& grid,
                                   double margin, const LiftFn& lift = {});

/// Nodes within `cells` (Chebyshev distance) of a node of L that has a
/// neighbour outside L.
std::vector<char> exclusion_band(const Grid& grid, const std::vector<char>& in_l,
                                 std::size_t cells);

struct DifEqReport {
  std::vector<DifEqVerdict> verdicts;  ///< nodes outside the exclusion band
  std::size_t excluded = 0;
  std::size_t case_a = 0;
  std::size_t case_b = 0;
  std::size_t violations = 0;
  std::size_t singular = 0;
  double worst_forward = 0.0;  ///< over case-A candidates
  double worst_gap = 0.0;      ///< max |gap| over case-B candidates
  double min_backward = 0.0;   ///< over nonsingular case-B candidates
};

DifEqReport check_differential_form(const ValueFn& V, const FlowSpec& flow,
                                    const ImpulseModel& model, const Grid& grid,
                                    const DifEqMargins& m, const QuadratureConfig& q,
                                    std::size_t workers = 1, const LiftFn& lift = {});

/// |V(x) - int_0^t C^g - V(phi(x,t))|.
double check_no_impulse_identity(const ValueFn& V, const FlowSpec& flow, const ImpulseModel& model,
                                 const State& x, double t, const QuadratureConfig& q);

struct HMonotoneResult {
  bool ok = true;
  double worst_drop = 0.0;  ///< largest h(s_k) - h(s_{k+1})
};

/// h(s) = V(phi(x,s)) - int_(s,t] C^g - I{t<inf} IV(phi(x,t)) on `samples`
/// equally spaced s in [0, t] (t = t_max when INFINITY); nondecreasing
/// within mono_tol.
HMonotoneResult check_h_monotone(const ValueFn& V, const FlowSpec& flow, const ImpulseModel& model,
                                 const State& x, const WaitTime& t, std::size_t samples,
                                 double t_max, double mono_tol, const QuadratureConfig& q);

struct ConditionsConfig {
  std::size_t samples = 41;   ///< points per trajectory
  double horizon = 5.0;       ///< trajectory length
  double delta = 1e-5;        ///< one-sided offsets delta, delta/10, delta/100
  double cont_tol = 1e-3;
  double gap_margin = 1e-6;
  double theta_eps = 1e-6;
};

struct CheckCount {
  std::size_t pass = 0;
  std::size_t total = 0;
  bool ok() const { return pass == total; }
};

struct ConditionsReport {
  CheckCount c6;  ///< theta set nonempty and contains the minimal candidate
  CheckCount c7;  ///< first L-hitting set contains its infimum
  CheckCount c8;  ///< one-sided semicontinuity along the flow
  CheckCount c9;  ///< left continuity off L
  bool ok() const { return c6.ok() && c7.ok() && c8.ok() && c9.ok(); }
};

ConditionsReport check_conditions(const BellmanProblem& problem, const ValueFn& V,
                                  const std::vector<State>& starts, const ThetaSearchConfig& cfg,
                                  const ConditionsConfig& cc, const QuadratureConfig& q);

/// Verdict CSV: x1,...,xd,case,forward_residual,impulse_gap.
void write_verdicts_csv(const std::string& path, const DifEqReport& report, std::size_t dim);

}  // namespace impulse
