#include "impulse/figures.hpp"

#include <cstdio>
#include <filesystem>

#include "impulse/csv.hpp"
#include "impulse/sim.hpp"

namespace impulse::sir {

std::vector<State> figure_lattice(const SirParams& p, std::size_t n) {
  std::vector<State> out;
  const double step = p.N / static_cast<double>(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const State x{step * static_cast<double>(i), step * static_cast<double>(j)};
      if (x[0] + x[1] < p.N) out.push_back(x);
    }
  }
  return out;
}

std::vector<FigureEntry> emit_figure_data(const SirParams& p, const std::vector<State>& starts,
                                          const std::string& dir, const QuadratureConfig& q) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const ImpulseModel model = make_model(p);
  const FlowSpec flow = make_flow(p);
  const StationaryStrategy optimal = analytic_optimal_strategy(p);
  SimCaps caps;
  caps.stop_display = default_horizon(p) / 8.0;

  std::vector<FigureEntry> entries;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%03zu.csv", i);
    const Trajectory traj = simulate(model, flow, optimal, starts[i], caps, q);
    write_trajectory_csv((fs::path(dir) / name).string(), traj, 2);
    entries.push_back({name, starts[i], traj.impulses.size(), traj.total_cost});
  }

  const Regime regime = classify(p);
  if (regime.threshold_slope) {
    const double s = *regime.threshold_slope;
    csv::Writer w((fs::path(dir) / "threshold_line.csv").string());
    w.row({"x1", "x2"});
    const double x1_end = p.N / (1.0 + s);  // where the line meets x1 + x2 = N
    for (int k = 0; k <= 100; ++k) {
      const double x1 = x1_end * k / 100.0;
      w.row({csv::format(x1), csv::format(s * x1)});
    }
    w.close();
  }

  csv::Writer idx((fs::path(dir) / "index.csv").string());
  idx.row({"file", "x1_0", "x2_0", "impulses", "total_cost"});
  for (const FigureEntry& e : entries) {
    idx.row({e.file, csv::format(e.start[0]), csv::format(e.start[1]), std::to_string(e.impulses),
             csv::format(e.total_cost)});
  }
  idx.close();
  return entries;
}

}  // namespace impulse::sir
