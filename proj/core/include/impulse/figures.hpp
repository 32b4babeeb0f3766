#pragma once

#include <string>
#include <vector>

#include "impulse/core.hpp"
#include "impulse/flow.hpp"
#include "impulse/sir.hpp"

namespace impulse::sir {

struct FigureEntry {
  std::string file;
  State start;
  std::size_t impulses = 0;
  double total_cost = 0.0;
};

/// Starting states spread over the triangle: (N i/(n+1), N j/(n+1)) for
/// i, j = 1..n inside x1 + x2 < N.
std::vector<State> figure_lattice(const SirParams& p, std::size_t n);

/// Writes one trajectory CSV (t,x1,x2,phase) per start under the optimal
/// strategy, threshold_line.csv (x1,x2) when the regime has a threshold
/// line, and index.csv listing the trajectories.
std::vector<FigureEntry> emit_figure_data(const SirParams& p, const std::vector<State>& starts,
                                          const std::string& dir, const QuadratureConfig& q);

}  // namespace impulse::sir
