#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace impulse::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigOrIo = 1,
  kNonConvergence = 2,
  kViolations = 3,
};

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

int cmd_solve(const std::string& config_path, const Overrides& o);
int cmd_verify(const std::string& config_path, const std::string& source, const Overrides& o);
int cmd_simulate(const std::string& config_path, const Overrides& o);
int cmd_figures(const std::string& config_path, const Overrides& o);
int cmd_regime(const std::string& config_path, const Overrides& o);

}  // namespace impulse::cli
