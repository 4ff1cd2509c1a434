#pragma once

#include <string>
#include <vector>

#include "osl/system.hpp"

namespace osl {

// Classical fixed-step RK4 over [0, t].
std::vector<double> reference_integrate(const Mode& mode, std::vector<double> x0,
                                        double t, int steps);

// Default step count giving step length <= tau/1000.
int default_rk4_steps(double t, double tau);

struct RichardsonCheck {
  std::vector<double> x;
  double rel_change = 0.0;  // |x(steps) - x(2*steps)| / max(1, |x(2*steps)|)
  bool ok = true;           // rel_change < 1e-8
};

// Integrates at `steps` and `2*steps` and compares; a failed check flags
// the result as inaccurate rather than aborting.
RichardsonCheck reference_integrate_checked(const Mode& mode, const std::vector<double>& x0,
                                            double t, int steps);

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> x;
  int active_mode = 0;
  int ball_index = -1;
  int cycle = 0;
};

struct SimViolation {
  int cycle = 0;
  double t = 0.0;
  std::string kind;  // "left_S" | "missed_target" | "no_ball" | "uncertified_ball"
  std::vector<double> x;
};

struct ClosedLoopResult {
  std::vector<TrajectorySample> trajectory;
  std::vector<SimViolation> violations;
  int cycles_completed = 0;
  bool ok = false;
};

// Runs `cycles` control cycles from x0.  Each cycle selects the first ball
// (row-major covering order) containing the state, integrates its pattern
// mode-by-mode with the RK4 oracle at sub-step resolution, checks S at every
// recorded sample and the leg target at the end of the cycle.  Two-zone
// controller pairs alternate legs each cycle.  x0 outside every ball of the
// first leg is a hard error (std::invalid_argument).
ClosedLoopResult closed_loop_simulate(const SwitchedSystem& sys, const Box& S,
                                      const std::vector<const Controller*>& legs,
                                      const std::vector<double>& x0, int cycles);

}  // namespace osl
