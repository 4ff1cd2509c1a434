#include "osl/euler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace osl {

namespace {

// g(u) = 1 + 2/u - 2(e^u - 1)/u^2, series -sum_{k>=1} 2 u^k / (k+2)!.
// Negative for u > 0, positive for u < 0.
double g_factor(double u) {
  if (std::fabs(u) < 0.5) {
    double sum = 0.0;
    double term = u;           // u^k
    double factorial = 6.0;    // (k+2)!
    for (int k = 1; k <= 22; ++k) {
      sum += term / factorial;
      term *= u;
      factorial *= static_cast<double>(k + 3);
    }
    return -2.0 * sum;
  }
  return 1.0 + 2.0 / u - 2.0 * std::expm1(u) / (u * u);
}

}  // namespace

double delta_bound(double lambda, double C, double delta, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("delta_bound: t must be >= 0");
  if (!(C >= 0.0)) throw std::invalid_argument("delta_bound: C must be >= 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta_bound: delta must be >= 0");
  if (t == 0.0) return delta;

  double radicand;
  if (lambda < 0.0) {
    double u = lambda * t;
    radicand = delta * delta * std::exp(u) +
               (C * C / (lambda * lambda)) * t * t * g_factor(u);
  } else if (lambda == 0.0) {
    radicand = delta * delta * std::exp(t) - C * C * t * t * g_factor(t);
  } else {
    double u = 3.0 * lambda * t;
    radicand = delta * delta * std::exp(u) -
               (C * C / (3.0 * lambda * lambda)) * t * t * g_factor(u);
  }

  if (radicand < 0.0) {
    double scale = delta * delta + C * C * t * t;
    if (radicand > -1e-14 * scale)
      radicand = 0.0;
    else
      throw std::runtime_error("delta_bound: radicand " + std::to_string(radicand) +
                               " below clamping tolerance");
  }
  return std::sqrt(radicand);
}

ConvexityCheck delta_second_derivative_positive(double lambda, double C, double delta,
                                                double tau) {
  const double fd = tau * 1e-4;
  const double t0 = tau * 1e-3;
  ConvexityCheck out;
  out.positive = true;
  out.min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    double t = t0 + (tau - t0) * (static_cast<double>(i) / 100.0);
    double dm = delta_bound(lambda, C, delta, t - fd);
    double d0 = delta_bound(lambda, C, delta, t);
    double dp = delta_bound(lambda, C, delta, t + fd);
    double second = (dp - 2.0 * d0 + dm) / (fd * fd);
    if (second < out.min_value) out.min_value = second;
  }
  out.positive = out.min_value > 1e-12;
  return out;
}

std::vector<double> euler_step(const Mode& mode, const std::vector<double>& x, double h) {
  std::vector<double> f = eval_field(mode.field, x);
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = x[i] + h * f[i];
  return f;
}

PostBall post_ball(const Mode& mode, const ModeConstants& mc, const Ball& start,
                   double tau, int substeps) {
  if (substeps < 1) throw std::invalid_argument("post_ball: substeps must be >= 1");
  const double h = tau / substeps;
  PostBall out;
  out.samples.reserve(static_cast<std::size_t>(substeps) + 1);
  out.samples.push_back({0.0, start.center, start.radius});
  out.convexity_mins.reserve(static_cast<std::size_t>(substeps));

  std::vector<double> x = start.center;
  double radius = start.radius;
  for (int i = 0; i < substeps; ++i) {
    ConvexityCheck cc = delta_second_derivative_positive(mc.lambda, mc.C, radius, h);
    out.convexity_mins.push_back(cc.min_value);
    if (!cc.positive && out.bad_substep < 0) {
      out.convexity_ok = false;
      out.bad_substep = i;
    }
    x = euler_step(mode, x, h);
    radius = delta_bound(mc.lambda, mc.C, radius, h);
    out.samples.push_back({h * (i + 1), x, radius});
  }
  out.final.center = std::move(x);
  out.final.radius = radius;
  return out;
}

ErrorTube tube_for_pattern(const SwitchedSystem& sys, const ConstantsTable& table,
                           const Ball& start, const Pattern& pattern) {
  ErrorTube tube;
  tube.samples.push_back({0.0, start.center, start.radius});
  Ball current = start;
  double t_base = 0.0;
  for (int mode_id : pattern) {
    const Mode& mode = sys.mode(mode_id);
    PostBall pb = post_ball(mode, table.of(mode_id), current, sys.tau, sys.substeps);
    for (std::size_t i = 1; i < pb.samples.size(); ++i) {
      TubeSample s = pb.samples[i];
      s.t += t_base;
      tube.samples.push_back(std::move(s));
    }
    current = pb.final;
    t_base += sys.tau;
  }
  return tube;
}

}  // namespace osl
