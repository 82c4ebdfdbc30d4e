#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "coolsim/error.hpp"

namespace coolsim {

enum class IntegratorMethod { rk4, adaptive };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::adaptive;
  double dt = 1e-2;             // fixed step (rk4) or initial step (adaptive)
  double tolerance = 1e-10;     // relative tolerance of the adaptive pair
  double abs_tolerance = 1e-12; // absolute floor of the adaptive pair
  double t_final = 1.0;
  std::size_t samples = 200;    // number of sampling intervals on [0, t_final]

  double sample_interval() const { return t_final / static_cast<double>(samples); }
};

void validate(const IntegratorConfig& cfg);

namespace detail {

template <typename State>
double scaled_error(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  double worst = 0.0;
  const auto e = err.reshaped();
  const auto a = y0.reshaped();
  const auto b = y1.reshaped();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(a(i)), std::abs(b(i)));
    worst = std::max(worst, std::abs(e(i)) / scale);
  }
  return worst;
}

template <typename State, typename Rhs>
State rk4_step(Rhs& rhs, double t, const State& y, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t = 0 and calls observe(t, y) at every
/// sample time k * cfg.sample_interval(), k = 0..cfg.samples. Steps are
/// clipped to land on sample times exactly. Returning false from observe
/// stops the run.
///
/// `State` is any dense Eigen type; `rhs` must return the same type.
template <typename State, typename Rhs, typename Observer>
void integrate(Rhs&& rhs, State y, const IntegratorConfig& cfg, Observer&& observe) {
  validate(cfg);
  const double interval = cfg.sample_interval();
  if (!observe(0.0, static_cast<const State&>(y))) return;

  if (cfg.method == IntegratorMethod::rk4) {
    const auto steps = static_cast<std::size_t>(std::ceil(interval / cfg.dt - 1e-9));
    const double h = interval / static_cast<double>(std::max<std::size_t>(steps, 1));
    for (std::size_t k = 1; k <= cfg.samples; ++k) {
      double t = (k - 1) * interval;
      for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) {
        y = detail::rk4_step<State>(rhs, t, y, h);
        t += h;
      }
      if (!observe(k * interval, static_cast<const State&>(y))) return;
    }
    return;
  }

  // Dormand-Prince 5(4), first-same-as-last.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = 0.0;
  double h = std::min(cfg.dt, interval);
  State k1 = rhs(t, y);
  std::size_t rejects = 0;
  for (std::size_t k = 1; k <= cfg.samples; ++k) {
    const double target = k * interval;
    while (t < target) {
      const bool last = t + h >= target * (1.0 - 1e-14);
      const double step = last ? target - t : h;
      const State k2 = rhs(t + c2 * step, State(y + step * (a21 * k1)));
      const State k3 = rhs(t + c3 * step, State(y + step * (a31 * k1 + a32 * k2)));
      const State k4 = rhs(t + c4 * step, State(y + step * (a41 * k1 + a42 * k2 + a43 * k3)));
      const State k5 = rhs(t + c5 * step, State(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
      const State k6 =
          rhs(t + step, State(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
      State y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = rhs(t + step, y_new);
      const State err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double norm = detail::scaled_error(err, y, y_new, cfg.tolerance, cfg.abs_tolerance);
      if (!std::isfinite(norm)) {
        throw Error(ErrorKind::integration_failure, "non-finite state at t=" + std::to_string(t));
      }
      const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      if (norm <= 1.0) {
        t = last ? target : t + step;
        y = std::move(y_new);
        k1 = k7;
        rejects = 0;
        if (!last) h = step * factor;
        else h = std::max(h, step * factor);
      } else {
        h = step * factor;
        if (++rejects > 200 || h < 1e-14 * std::max(1.0, target)) {
          throw Error(ErrorKind::integration_failure, "step size underflow at t=" + std::to_string(t));
        }
      }
    }
    if (!observe(target, static_cast<const State&>(y))) return;
  }
}

}  // namespace coolsim
