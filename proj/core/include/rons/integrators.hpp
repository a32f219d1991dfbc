#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "rons/errors.hpp"
#include "rons/types.hpp"

namespace rons {

/// Right-hand side of ydot = F(t, y).
template <class State>
using RhsFn = std::function<State(double, const State&)>;

namespace detail {

template <class State>
bool all_finite(const State& y) {
  if constexpr (std::is_arithmetic_v<State>) {
    return std::isfinite(y);
  } else {
    return y.allFinite();
  }
}

template <class State>
void require_finite(const State& y, double t, const char* stage) {
  if (!all_finite(y)) {
    throw DivergenceError(std::string("non-finite values in ") + stage + " at t = " +
                              std::to_string(t),
                          t);
  }
}

inline void require_positive_step(double dt, double t) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw StepCollapseError("time step must be positive and finite, got " + std::to_string(dt),
                            t);
  }
}

}  // namespace detail

/// Classical four-stage Runge-Kutta step.
template <class State>
State step_rk4(const RhsFn<State>& rhs, double t, const State& y, double dt) {
  detail::require_positive_step(dt, t);
  const State k1 = rhs(t, y);
  detail::require_finite(k1, t, "RK4 stage 1");
  const State k2 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k1));
  detail::require_finite(k2, t, "RK4 stage 2");
  const State k3 = rhs(t + 0.5 * dt, State(y + (0.5 * dt) * k2));
  detail::require_finite(k3, t, "RK4 stage 3");
  const State k4 = rhs(t + dt, State(y + dt * k3));
  detail::require_finite(k4, t, "RK4 stage 4");
  State out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  detail::require_finite(out, t, "RK4 update");
  return out;
}

/// Third-order strong-stability-preserving Runge-Kutta, Shu-Osher form.
template <class State>
State step_ssprk3(const RhsFn<State>& rhs, double t, const State& y, double dt) {
  detail::require_positive_step(dt, t);
  const State f0 = rhs(t, y);
  detail::require_finite(f0, t, "SSP-RK3 stage 1");
  const State y1 = y + dt * f0;
  const State f1 = rhs(t + dt, y1);
  detail::require_finite(f1, t, "SSP-RK3 stage 2");
  const State y2 = 0.75 * y + 0.25 * (y1 + dt * f1);
  const State f2 = rhs(t + 0.5 * dt, y2);
  detail::require_finite(f2, t, "SSP-RK3 stage 3");
  State out = (1.0 / 3.0) * y + (2.0 / 3.0) * (y2 + dt * f2);
  detail::require_finite(out, t, "SSP-RK3 update");
  return out;
}

enum class Stepper { rk4, ssprk3 };

inline const char* to_string(Stepper s) { return s == Stepper::rk4 ? "rk4" : "ssprk3"; }

template <class State>
State step(Stepper method, const RhsFn<State>& rhs, double t, const State& y, double dt) {
  return method == Stepper::rk4 ? step_rk4(rhs, t, y, dt) : step_ssprk3(rhs, t, y, dt);
}

template <class State>
struct StepSchedule {
  struct Fixed {
    double dt;
  };
  struct Cfl {
    std::function<double(const State&)> dt;
  };

  std::variant<Fixed, Cfl> mode = Fixed{0.0};
  double t_final = 0.0;
  std::size_t max_steps = 10'000'000;

  static StepSchedule fixed(double dt, double t_final) {
    return {Fixed{dt}, t_final};
  }
  static StepSchedule cfl(std::function<double(const State&)> rule, double t_final) {
    return {Cfl{std::move(rule)}, t_final};
  }
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> dt_history;
  std::size_t steps = 0;
};

template <class State>
struct IntegrateOptions {
  Stepper method = Stepper::rk4;
  /// Observation spacing in simulation time; 0 observes after every step.
  /// Steps are clipped so that every observation time k * cadence is hit
  /// exactly.
  double cadence = 0.0;
  /// Store observed states in the trajectory.
  bool keep_states = true;
  std::vector<std::function<void(double, const State&)>> observers;
  /// Optional correction applied after each accepted step (off when empty).
  std::function<void(State&)> post_step;
};

/// Advances y0 from t = 0 to schedule.t_final. The last step (and any step
/// crossing an observation time) is clipped to land exactly on it.
template <class State>
Trajectory<State> integrate(const RhsFn<State>& rhs, const State& y0,
                            const StepSchedule<State>& schedule,
                            const IntegrateOptions<State>& opts = {}) {
  const double t_final = schedule.t_final;
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ValidationError("t_final must be positive");
  }
  if (const auto* fixed = std::get_if<typename StepSchedule<State>::Fixed>(&schedule.mode)) {
    if (!(fixed->dt > 0.0)) throw ValidationError("fixed time step must be positive");
  }
  if (opts.cadence < 0.0) throw ValidationError("observer cadence must be non-negative");

  Trajectory<State> traj;
  auto observe = [&](double t, const State& y) {
    traj.times.push_back(t);
    if (opts.keep_states) traj.states.push_back(y);
    for (const auto& obs : opts.observers) obs(t, y);
  };

  State y = y0;
  double t = 0.0;
  std::size_t next_obs = 1;
  observe(t, y);

  // Land-on tolerance for clipping against stops.
  const double snap = 1e-12 * t_final;
  while (t < t_final) {
    if (traj.steps >= schedule.max_steps) {
      throw StepCollapseError("exceeded " + std::to_string(schedule.max_steps) +
                                  " steps before t_final",
                              t);
    }
    double dt = 0.0;
    if (const auto* fixed = std::get_if<typename StepSchedule<State>::Fixed>(&schedule.mode)) {
      dt = fixed->dt;
    } else {
      dt = std::get<typename StepSchedule<State>::Cfl>(schedule.mode).dt(y);
    }
    detail::require_positive_step(dt, t);

    double stop = t_final;
    bool observing = opts.cadence <= 0.0;
    if (opts.cadence > 0.0) {
      const double t_obs = static_cast<double>(next_obs) * opts.cadence;
      if (t_obs < t_final - snap) {
        stop = t_obs;
      }
    }
    double t_next = t + dt;
    if (t_next >= stop - snap) {
      dt = stop - t;
      t_next = stop;
      if (opts.cadence > 0.0) {
        observing = true;
        ++next_obs;
      }
    }

    try {
      y = step(opts.method, rhs, t, y, dt);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (step " + std::to_string(traj.steps) +
                                ", dt = " + std::to_string(dt) + ")",
                            t);
    }
    if (opts.post_step) opts.post_step(y);
    t = t_next;
    ++traj.steps;
    traj.dt_history.push_back(dt);
    if (observing || t >= t_final) observe(t, y);
  }
  return traj;
}

}  // namespace rons
