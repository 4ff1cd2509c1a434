#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "osl/config.hpp"
#include "osl/expr.hpp"
#include "osl/rng.hpp"
#include "osl/sim.hpp"
#include "osl/synth.hpp"

using namespace osl;

namespace {

const std::string kConfigDir = OSL_CONFIG_DIR;

Mode make_mode(int id, const std::vector<const char*>& field, int dim) {
  Mode m;
  m.id = id;
  for (const char* f : field) m.field.push_back(parse_expression(f, dim));
  return m;
}

}  // namespace

TEST_CASE("reference integrator against closed-form solutions") {
  Mode decay = make_mode(1, {"-x1"}, 1);
  std::vector<double> x = reference_integrate(decay, {1.0}, 1.0, 100);
  CHECK(x[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  Mode osc = make_mode(1, {"x2", "-x1"}, 2);
  x = reference_integrate(osc, {1.0, 0.0}, 3.14159265358979 / 2.0, 200);
  CHECK(x[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-8));

  CHECK_THROWS_AS(reference_integrate(decay, {1.0}, 1.0, 0), std::invalid_argument);
}

TEST_CASE("integrator error decays at fourth order") {
  Mode pend = make_mode(1, {"x2", "-sin(x1)"}, 2);
  std::vector<double> ref = reference_integrate(pend, {1.0, 0.0}, 2.0, 16384);

  std::vector<double> errs;
  for (int steps : {16, 32, 64, 128}) {
    std::vector<double> x = reference_integrate(pend, {1.0, 0.0}, 2.0, steps);
    errs.push_back(distance(x, ref));
  }
  // least-squares slope of log2(err) against log2(steps)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < errs.size(); ++i) {
    double lx = std::log2(16 << i), ly = std::log2(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(errs.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(-slope == doctest::Approx(4.0).epsilon(0.075));  // 4 +- 0.3
}

TEST_CASE("default step count keeps the step at most tau/1000") {
  CHECK(default_rk4_steps(0.5, 0.5) == 1000);
  CHECK(default_rk4_steps(0.05, 0.5) == 100);
  CHECK(default_rk4_steps(0.00375, 0.15) == 25);
  CHECK(default_rk4_steps(1e-9, 0.5) >= 1);
}

TEST_CASE("Richardson self-check flags accuracy") {
  Mode m = make_mode(1, {"-x1 - 2", "x1"}, 2);
  RichardsonCheck rc =
      reference_integrate_checked(m, {1.0, 0.5}, 0.2, default_rk4_steps(0.2, 0.2));
  CHECK(rc.ok);
  CHECK(rc.rel_change < 1e-8);

  // deliberately coarse integration of a fast oscillator fails the check
  Mode fast = make_mode(1, {"100*x2", "-100*x1"}, 2);
  RichardsonCheck bad = reference_integrate_checked(fast, {1.0, 0.0}, 1.0, 2);
  CHECK(!bad.ok);
}

namespace {

struct LoopFixture {
  ProblemConfig cfg;
  ConstantsTable table;
  Controller ctrl;

  LoopFixture() {
    cfg = load_config(std::string(OSL_CONFIG_DIR) + "/twotank.cfg");
    table = compute_constants(cfg.sys, cfg.S, cfg.overrides, cfg.estimator);
    SynthesisProblem prob{&cfg.sys, &table, cfg.S, cfg.R, cfg.R, cfg.grid,
                          cfg.max_pattern_length};
    ctrl = synthesize_leg(prob, "R", "R", 1);
  }
};

}  // namespace

TEST_CASE("closed loop: recurrence and safety hold along oracle trajectories") {
  LoopFixture fx;
  REQUIRE(fx.ctrl.status == ControllerStatus::Complete);

  Rng rng(20240817);
  for (int run = 0; run < 5; ++run) {
    std::vector<double> x0 = rng.point_in_box(fx.cfg.R);
    ClosedLoopResult res =
        closed_loop_simulate(fx.cfg.sys, fx.cfg.S, {&fx.ctrl}, x0, 4);
    CAPTURE(run);
    CHECK(res.ok);
    CHECK(res.violations.empty());
    CHECK(res.cycles_completed == 4);

    REQUIRE(!res.trajectory.empty());
    const TrajectorySample& first = res.trajectory.front();
    CHECK(first.t == 0.0);
    CHECK(first.cycle == 0);
    CHECK(first.x == x0);

    double prev_t = -1.0;
    for (const TrajectorySample& s : res.trajectory) {
      CHECK(s.t > prev_t);
      prev_t = s.t;
      CHECK(s.ball_index >= 0);
      CHECK(s.ball_index < static_cast<int>(fx.ctrl.balls.size()));
      CHECK(s.cycle >= 0);
      CHECK(s.cycle < 4);
      bool known_mode = false;
      for (const auto& m : fx.cfg.sys.modes) known_mode |= (m.id == s.active_mode);
      CHECK(known_mode);
      CHECK(fx.cfg.S.contains(s.x));
    }
    // end of every cycle lands back in the target box
    CHECK(fx.cfg.R.contains(res.trajectory.back().x));
  }
}

TEST_CASE("closed loop: error paths") {
  LoopFixture fx;

  SUBCASE("start outside every covering ball is a hard error") {
    CHECK_THROWS_AS(
        closed_loop_simulate(fx.cfg.sys, fx.cfg.S, {&fx.ctrl}, {10.0, 10.0}, 2),
        std::invalid_argument);
  }

  SUBCASE("landing on an uncertified ball stops the run") {
    Controller crippled = fx.ctrl;
    for (auto& bc : crippled.balls) {
      bc.certified = false;
      bc.failure = FailureKind::NoPattern;
      bc.pattern.clear();
      bc.steps.clear();
    }
    crippled.status = ControllerStatus::Partial;
    ClosedLoopResult res = closed_loop_simulate(fx.cfg.sys, fx.cfg.S, {&crippled},
                                                fx.cfg.R.center(), 2);
    CHECK(!res.ok);
    REQUIRE(!res.violations.empty());
    CHECK(res.violations[0].kind == "uncertified_ball");
  }

  SUBCASE("a wrong pattern is caught as a target miss or safety violation") {
    Controller wrong = fx.ctrl;
    // steer every ball with mode 2 only: the drain drags x2 far below R
    for (auto& bc : wrong.balls) bc.pattern = Pattern(6, 2);
    ClosedLoopResult res = closed_loop_simulate(fx.cfg.sys, fx.cfg.S, {&wrong},
                                                fx.cfg.R.center(), 3);
    CHECK(!res.ok);
    REQUIRE(!res.violations.empty());
    CHECK((res.violations[0].kind == "missed_target" || res.violations[0].kind == "left_S" ||
           res.violations[0].kind == "no_ball"));
  }
}
