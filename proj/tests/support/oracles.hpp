#pragma once

// Reference computations that share no code with the library: plain RK4 on
// the SIR equations, brute-force minimisation over the single impulse, and
// closed forms for the discounted test models.

#include <array>
#include <filesystem>
#include <string>

namespace oracle {

struct Sir {
  double beta;
  double gamma;
  double c;
};

/// (x1, x2, accumulated running cost) after time t, RK4 with step dt.
std::array<double, 3> sir_rk4(const Sir& p, double x1, double x2, double t, double dt = 1e-4);

/// Total running cost of never intervening: x1(0) - x1(inf).
double sir_stop_cost(const Sir& p, double x1, double x2);

/// min(stop, min over theta of cost up to theta plus c x2(theta)): every
/// impulse lands on the cemetery, so one impulse is all a strategy can use.
double sir_value_brute(const Sir& p, double x1, double x2, double t_max = 12.0, double dt = 1e-3);

/// C^g + grad V . f for V = c x2 (the value on the impulse region).
double sir_generator_on_impulse_region(const Sir& p, double x1, double x2);

/// Discounted maintenance model on [0,1]: wear y' = r (1 - y), cost w y,
/// repair to 0 at cost K. Value via the renewal equation for V(0).
double maintenance_value(double r, double w, double K, double alpha, double y);

/// A fresh, empty scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace oracle
