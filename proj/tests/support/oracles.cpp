#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unistd.h>

namespace oracle {

namespace {

std::array<double, 3> rhs(const Sir& p, const std::array<double, 3>& y) {
  const double n = y[0] + y[1];
  const double inf = n > 0 ? p.beta * y[0] * y[1] / n : 0.0;
  return {-inf, inf - p.gamma * y[1], inf};
}

void rk4_step(const Sir& p, std::array<double, 3>& y, double h) {
  auto add = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double s) {
    return std::array<double, 3>{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  const auto k1 = rhs(p, y);
  const auto k2 = rhs(p, add(y, k1, h / 2));
  const auto k3 = rhs(p, add(y, k2, h / 2));
  const auto k4 = rhs(p, add(y, k3, h));
  for (int i = 0; i < 3; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
}

}  // namespace

std::array<double, 3> sir_rk4(const Sir& p, double x1, double x2, double t, double dt) {
  std::array<double, 3> y{x1, x2, 0.0};
  const auto steps = static_cast<long>(std::ceil(t / dt));
  const double h = steps > 0 ? t / steps : 0.0;
  for (long i = 0; i < steps; ++i) rk4_step(p, y, h);
  return y;
}

double sir_stop_cost(const Sir& p, double x1, double x2) {
  // Integrate until the infected mass is negligible.
  std::array<double, 3> y{x1, x2, 0.0};
  const double h = 1e-3;
  for (long i = 0; i < 2'000'000 && y[1] > 1e-13 * (x1 + x2 + 1); ++i) rk4_step(p, y, h);
  return y[2];
}

double sir_value_brute(const Sir& p, double x1, double x2, double t_max, double dt) {
  if (x1 <= 0 || x2 <= 0) return 0.0;
  double best = sir_stop_cost(p, x1, x2);
  std::array<double, 3> y{x1, x2, 0.0};
  const auto steps = static_cast<long>(std::ceil(t_max / dt));
  best = std::min(best, p.c * x2);
  for (long i = 0; i < steps; ++i) {
    rk4_step(p, y, dt);
    best = std::min(best, y[2] + p.c * y[1]);
  }
  return best;
}

double sir_generator_on_impulse_region(const Sir& p, double x1, double x2) {
  const double inf = p.beta * x1 * x2 / (x1 + x2);
  return inf + p.c * (inf - p.gamma * x2);
}

double maintenance_value(double r, double w, double K, double a, double y) {
  // Discounted running cost over [0, t] starting from wear y.
  auto run = [&](double y0, double t) {
    if (!std::isfinite(t)) return w * (1.0 / a - (1.0 - y0) / (a + r));
    return w * ((1.0 - std::exp(-a * t)) / a - (1.0 - y0) * (1.0 - std::exp(-(a + r) * t)) / (a + r));
  };
  // V(0) from the renewal equation, minimised over a fine cycle-length scan.
  double v0 = run(0.0, INFINITY);
  for (double t = 1e-4; t < 60.0; t += 1e-4) {
    const double d = std::exp(-a * t);
    v0 = std::min(v0, (run(0.0, t) + d * K) / (1.0 - d));
  }
  double best = run(y, INFINITY);
  best = std::min(best, K + v0);
  for (double t = 1e-4; t < 60.0; t += 1e-4) {
    best = std::min(best, run(y, t) + std::exp(-a * t) * (K + v0));
  }
  return best;
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("impulse_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
