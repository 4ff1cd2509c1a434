#pragma once

#include <vector>

#include "osl/system.hpp"

namespace osl {

// One forward Euler step x + h f(x).
std::vector<double> euler_step(const Mode& mode, const std::vector<double>& x, double h);

// Closed-form radius bound delta_j(t) for the distance between the true flow
// and the Euler approximation started delta-apart, case-selected on the exact
// sign of lambda:
//
//   lambda < 0:  ( d^2 e^{lt} + C^2/l^2 (t^2 + 2t/l + 2/l^2 (1 - e^{lt})) )^{1/2}
//   lambda = 0:  ( d^2 e^{t}  + C^2 (-t^2 - 2t + 2(e^t - 1)) )^{1/2}
//   lambda > 0:  ( d^2 e^{3lt} + C^2/(3l^2) (-t^2 - 2t/(3l) + 2/(9l^2)(e^{3lt}-1)) )^{1/2}
//
// The parenthesised factors cancel catastrophically when |lambda| t is small,
// so they are evaluated through the exact rewrite
//   t^2 + 2t/l + 2/l^2 (1 - e^{lt})            =  t^2 g(lt)
//   -t^2 - 2t + 2(e^t - 1)                     = -t^2 g(t)
//   -t^2 - 2t/(3l) + 2/(9l^2)(e^{3lt} - 1)     = -t^2 g(3lt)
// with g(u) = 1 + 2/u - 2(e^u - 1)/u^2 = -sum_{k>=1} 2 u^k/(k+2)!, using the
// series for small |u|.  Every term of the radicand is then nonnegative by
// construction; if roundoff still drove it below zero it is clamped at a
// relative scale of 1e-14 and anything worse is a hard error.
double delta_bound(double lambda, double C, double delta, double t);

struct ConvexityCheck {
  bool positive = false;
  double min_value = 0.0;  // smallest sampled second difference
};

// Central finite differences on the closed-form delta curve: step tau*1e-4,
// 101 uniform samples on [tau*1e-3, tau], positive iff every sampled second
// difference exceeds +1e-12.
ConvexityCheck delta_second_derivative_positive(double lambda, double C, double delta,
                                                double tau);

struct PostBall {
  Ball final;                         // ball after one full period
  std::vector<TubeSample> samples;    // sub-step boundaries, t in [0, tau]
  std::vector<double> convexity_mins; // one per sub-step
  bool convexity_ok = true;
  int bad_substep = -1;               // first sub-step whose convexity check failed
};

// Propagates a ball through one switching period of `mode` with `substeps`
// Euler sub-steps, chaining the error bound per sub-step and running the
// convexity check on each sub-step's delta curve.
PostBall post_ball(const Mode& mode, const ModeConstants& mc, const Ball& start,
                   double tau, int substeps);

// Full tube for a pattern over [0, k*tau]; samples at every sub-step
// boundary, t strictly increasing, radius_0 = start.radius.
ErrorTube tube_for_pattern(const SwitchedSystem& sys, const ConstantsTable& table,
                           const Ball& start, const Pattern& pattern);

}  // namespace osl
