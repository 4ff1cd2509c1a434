#include "osl/synth.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>

#include "osl/euler.hpp"

namespace osl {

std::string pattern_to_string(const Pattern& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p[i]);
  }
  return s;
}

std::string failure_kind_name(FailureKind k) {
  switch (k) {
    case FailureKind::None: return "none";
    case FailureKind::BallNotInS: return "ball_not_in_S";
    case FailureKind::LeftS: return "left_S";
    case FailureKind::FinalNotInTarget: return "final_not_in_target";
    case FailureKind::ConvexityFailed: return "convexity_failed";
    case FailureKind::NoPattern: return "no_pattern";
  }
  return "unknown";
}

std::vector<Ball> cover_region(const Box& region, const std::vector<int>& grid) {
  const std::size_t n = region.lo.size();
  if (grid.size() != n)
    throw std::invalid_argument("cover_region: grid size does not match dimension");
  long total = 1;
  double diag2 = 0.0;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid[i] < 1) throw std::invalid_argument("cover_region: grid cells must be >= 1");
    w[i] = (region.hi[i] - region.lo[i]) / grid[i];
    diag2 += w[i] * w[i];
    total *= grid[i];
  }
  const double radius = 0.5 * std::sqrt(diag2);

  std::vector<Ball> balls;
  balls.reserve(static_cast<std::size_t>(total));
  for (long idx = 0; idx < total; ++idx) {
    Ball b;
    b.radius = radius;
    b.center.resize(n);
    long rem = idx;
    for (std::size_t ii = n; ii-- > 0;) {
      const long k = rem % grid[ii];
      rem /= grid[ii];
      b.center[ii] = region.lo[ii] + (k + 0.5) * w[ii];
    }
    balls.push_back(std::move(b));
  }
  return balls;
}

namespace {

// First violation within one propagated period, sub-steps checked in order,
// convexity before containment on each sub-step (convexity is what lets the
// end-point check stand in for the whole sub-interval).
struct PeriodScan {
  bool viable = true;
  FailureKind failure = FailureKind::None;
  int substep = -1;  // 0-based sub-step of the first violation
};

PeriodScan scan_period(const PostBall& pb, const Box& S) {
  PeriodScan ps;
  const int s = static_cast<int>(pb.convexity_mins.size());
  for (int k = 0; k < s; ++k) {
    if (pb.bad_substep == k) {
      ps.viable = false;
      ps.failure = FailureKind::ConvexityFailed;
      ps.substep = k;
      return ps;
    }
    const TubeSample& ts = pb.samples[static_cast<std::size_t>(k) + 1];
    if (!ball_in_box(Ball{ts.center, ts.radius}, S).inside) {
      ps.viable = false;
      ps.failure = FailureKind::LeftS;
      ps.substep = k;
      return ps;
    }
  }
  return ps;
}

}  // namespace

CheckResult check_pattern(const SynthesisProblem& prob, const Ball& start,
                          const Pattern& pattern) {
  const SwitchedSystem& sys = *prob.sys;
  CheckResult res;
  res.tube.samples.push_back({0.0, start.center, start.radius});

  if (!ball_in_box(start, prob.S).inside) {
    res.failure = FailureKind::BallNotInS;
    res.fail_step = 0;
    return res;
  }

  Ball cur = start;
  int global_step = 0;
  for (std::size_t p = 0; p < pattern.size(); ++p) {
    const Mode& mode = sys.mode(pattern[p]);
    const ModeConstants& mc = prob.table->of(pattern[p]);
    const PostBall pb = post_ball(mode, mc, cur, sys.tau, sys.substeps);
    const double t0 = static_cast<double>(p) * sys.tau;

    for (int k = 0; k < sys.substeps; ++k) {
      ++global_step;
      const TubeSample& ts = pb.samples[static_cast<std::size_t>(k) + 1];
      res.tube.samples.push_back({t0 + ts.t, ts.center, ts.radius});

      StepEvidence ev;
      ev.t = t0 + ts.t;
      ev.convexity_min = pb.convexity_mins[static_cast<std::size_t>(k)];
      ev.margin_S = ball_in_box(Ball{ts.center, ts.radius}, prob.S).margin;
      res.steps.push_back(ev);

      if (pb.bad_substep == k) {
        res.failure = FailureKind::ConvexityFailed;
        res.fail_step = global_step;
        return res;
      }
      if (ev.margin_S < 0.0) {
        res.failure = FailureKind::LeftS;
        res.fail_step = global_step;
        return res;
      }
    }
    cur = pb.final;
  }

  const BallInBox tb = ball_in_box(cur, prob.target);
  res.final_margin_target = tb.margin;
  if (!tb.inside) {
    res.failure = FailureKind::FinalNotInTarget;
    res.fail_step = global_step;
    return res;
  }
  res.ok = true;
  return res;
}

SearchOutcome find_pattern(const SynthesisProblem& prob, const Ball& start) {
  const SwitchedSystem& sys = *prob.sys;
  SearchOutcome out;

  struct Node {
    Ball end;
    Pattern prefix;
  };
  std::deque<Node> queue;
  queue.push_back({start, {}});

  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();

    for (int m = 1; m <= sys.num_modes(); ++m) {
      ++out.patterns_tried;
      const PostBall pb =
          post_ball(sys.mode(m), prob.table->of(m), node.end, sys.tau, sys.substeps);
      const PeriodScan ps = scan_period(pb, prob.S);
      if (!ps.viable) {
        if (ps.failure == FailureKind::ConvexityFailed)
          ++out.count_convexity;
        else
          ++out.count_left_S;
        continue;  // every extension inherits the violation
      }
      if (ball_in_box(pb.final, prob.target).inside) {
        out.pattern = node.prefix;
        out.pattern->push_back(m);
        return out;
      }
      ++out.count_final_not_in_target;
      if (static_cast<int>(node.prefix.size()) + 1 < prob.max_len) {
        Node child;
        child.end = pb.final;
        child.prefix = node.prefix;
        child.prefix.push_back(m);
        queue.push_back(std::move(child));
      }
    }
  }
  return out;
}

Controller synthesize_leg(const SynthesisProblem& prob, const char* from_name,
                          const char* to_name, int jobs) {
  if (prob.max_len < 1) throw std::invalid_argument("synthesize_leg: max_len must be >= 1");
  std::vector<Ball> balls = cover_region(prob.source, prob.grid);
  std::vector<BallCertificate> certs(balls.size());

  auto process = [&](std::size_t i) {
    BallCertificate& c = certs[i];
    c.index = static_cast<int>(i);
    c.ball = balls[i];
    if (!ball_in_box(balls[i], prob.S).inside) {
      c.failure = FailureKind::BallNotInS;
      return;
    }
    SearchOutcome so = find_pattern(prob, balls[i]);
    c.patterns_tried = so.patterns_tried;
    c.count_left_S = so.count_left_S;
    c.count_final_not_in_target = so.count_final_not_in_target;
    c.count_convexity = so.count_convexity;
    if (!so.pattern) {
      c.failure = FailureKind::NoPattern;
      return;
    }
    const CheckResult cr = check_pattern(prob, balls[i], *so.pattern);
    c.pattern = *so.pattern;
    c.certified = cr.ok;
    c.failure = cr.failure;
    c.steps = cr.steps;
    c.final_margin_target = cr.final_margin_target;
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < balls.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= balls.size()) return;
        process(i);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Controller ctrl;
  ctrl.from_name = from_name;
  ctrl.to_name = to_name;
  ctrl.source = prob.source;
  ctrl.target = prob.target;
  ctrl.grid = prob.grid;
  ctrl.delta = balls.empty() ? 0.0 : balls.front().radius;
  ctrl.balls = std::move(certs);
  ctrl.status = ControllerStatus::Complete;
  for (const auto& b : ctrl.balls)
    if (!b.certified) ctrl.status = ControllerStatus::Partial;
  return ctrl;
}

}  // namespace osl
