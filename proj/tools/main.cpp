#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "impulse/core.hpp"

namespace cli = impulse::cli;

int main(int argc, char** argv) {
  CLI::App app{"Impulse control solver: value iteration, verification and simulation"};
  app.require_subcommand(1);

  std::string config;
  std::string source = "numeric";
  std::string out;
  std::uint64_t seed = 0;
  std::size_t workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "Random seed (overrides seed)");
    sub->add_option("--workers", workers, "Worker threads for grid sweeps")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "Value iteration on the grid");
  CLI::App* verify = app.add_subcommand("verify", "Differential-form check of a value function");
  CLI::App* simulate = app.add_subcommand("simulate", "Run a strategy from initial states");
  CLI::App* figures = app.add_subcommand("figures", "Trajectory data for the SIR figures");
  CLI::App* regime = app.add_subcommand("regime", "Classify SIR parameters");
  for (CLI::App* sub : {solve, verify, simulate, figures, regime}) add_common(sub);
  verify->add_option("--source", source, "numeric (field CSV) or analytic (SIR closed form)")
      ->check(CLI::IsMember({"numeric", "analytic"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigOrIo;
  }

  cli::Overrides o;
  if (!out.empty()) o.out = out;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--workers")) o.workers = workers;
  }

  try {
    if (*solve) return cli::cmd_solve(config, o);
    if (*verify) return cli::cmd_verify(config, source, o);
    if (*simulate) return cli::cmd_simulate(config, o);
    if (*figures) return cli::cmd_figures(config, o);
    return cli::cmd_regime(config, o);
  } catch (const impulse::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return cli::kConfigOrIo;
}
