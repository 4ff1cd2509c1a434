#include "osl/sim.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "osl/geometry.hpp"

namespace osl {

namespace {

struct Rk4Scratch {
  std::vector<double> k1, k2, k3, k4, xt;
  explicit Rk4Scratch(std::size_t n) : k1(n), k2(n), k3(n), k4(n), xt(n) {}
};

void rk4_step(const Mode& mode, std::vector<double>& x, double h, Rk4Scratch& s) {
  const std::size_t n = x.size();
  eval_field_into(mode.field, x, s.k1);
  for (std::size_t i = 0; i < n; ++i) s.xt[i] = x[i] + 0.5 * h * s.k1[i];
  eval_field_into(mode.field, s.xt, s.k2);
  for (std::size_t i = 0; i < n; ++i) s.xt[i] = x[i] + 0.5 * h * s.k2[i];
  eval_field_into(mode.field, s.xt, s.k3);
  for (std::size_t i = 0; i < n; ++i) s.xt[i] = x[i] + h * s.k3[i];
  eval_field_into(mode.field, s.xt, s.k4);
  for (std::size_t i = 0; i < n; ++i)
    x[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
}

}  // namespace

std::vector<double> reference_integrate(const Mode& mode, std::vector<double> x0,
                                        double t, int steps) {
  if (steps <= 0) throw std::invalid_argument("reference_integrate: steps must be positive");
  Rk4Scratch s(x0.size());
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) rk4_step(mode, x0, h, s);
  return x0;
}

int default_rk4_steps(double t, double tau) {
  const double target = tau / 1000.0;
  int steps = static_cast<int>(std::ceil(t / target - 1e-12));
  return steps < 1 ? 1 : steps;
}

RichardsonCheck reference_integrate_checked(const Mode& mode, const std::vector<double>& x0,
                                            double t, int steps) {
  RichardsonCheck rc;
  std::vector<double> coarse = reference_integrate(mode, x0, t, steps);
  rc.x = reference_integrate(mode, x0, t, 2 * steps);
  double diff = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < rc.x.size(); ++i) {
    diff += (coarse[i] - rc.x[i]) * (coarse[i] - rc.x[i]);
    mag += rc.x[i] * rc.x[i];
  }
  rc.rel_change = std::sqrt(diff) / std::max(1.0, std::sqrt(mag));
  rc.ok = rc.rel_change < 1e-8;
  return rc;
}

ClosedLoopResult closed_loop_simulate(const SwitchedSystem& sys, const Box& S,
                                      const std::vector<const Controller*>& legs,
                                      const std::vector<double>& x0, int cycles) {
  if (legs.empty()) throw std::invalid_argument("closed_loop_simulate: no controller");
  if (x0.size() != static_cast<std::size_t>(sys.n))
    throw std::invalid_argument("closed_loop_simulate: x0 dimension mismatch");

  ClosedLoopResult res;
  std::vector<double> x = x0;
  double t = 0.0;
  const double h = sys.h();
  const int rk_steps = default_rk4_steps(h, sys.tau);
  Rk4Scratch scratch(x.size());

  auto find_ball = [](const Controller& c, const std::vector<double>& pt) -> int {
    for (std::size_t i = 0; i < c.balls.size(); ++i) {
      const Ball& b = c.balls[i].ball;
      if (distance(pt, b.center) <= b.radius) return static_cast<int>(i);
    }
    return -1;
  };

  for (int cycle = 0; cycle < cycles; ++cycle) {
    const Controller& leg = *legs[cycle % legs.size()];
    const int bi = find_ball(leg, x);
    if (bi < 0) {
      if (cycle == 0)
        throw std::invalid_argument("closed_loop_simulate: x0 outside every covering ball");
      res.violations.push_back({cycle, t, "no_ball", x});
      return res;
    }
    const BallCertificate& cert = leg.balls[bi];
    if (!cert.certified) {
      res.violations.push_back({cycle, t, "uncertified_ball", x});
      return res;
    }

    if (cycle == 0)
      res.trajectory.push_back({t, x, cert.pattern.front(), bi, cycle});

    for (int mode_id : cert.pattern) {
      const Mode& mode = sys.mode(mode_id);
      for (int k = 0; k < sys.substeps; ++k) {
        for (int r = 0; r < rk_steps; ++r) rk4_step(mode, x, h / rk_steps, scratch);
        t += h;
        res.trajectory.push_back({t, x, mode_id, bi, cycle});
        if (!S.contains(x)) {
          res.violations.push_back({cycle, t, "left_S", x});
          return res;
        }
      }
    }

    if (!leg.target.contains(x)) {
      res.violations.push_back({cycle, t, "missed_target", x});
      return res;
    }
    res.cycles_completed = cycle + 1;
  }
  res.ok = res.violations.empty() && res.cycles_completed == cycles;
  return res;
}

}  // namespace osl
