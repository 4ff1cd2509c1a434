#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osl/expr.hpp"
#include "osl/geometry.hpp"

namespace osl {

// Optional annotation that a mode's field is f(x) = A x + b.  Checked against
// the expressions on load; enables exact constants.
struct AffinePart {
  int n = 0;
  std::vector<double> A;  // row-major n*n
  std::vector<double> b;  // n

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int j = 0; j < n; ++j) s += A[i * n + j] * x[j];
      y[i] = s;
    }
    return y;
  }
};

struct Mode {
  int id = 0;                        // 1-based, dense
  std::vector<Expr> field;           // one expression per state component
  std::optional<AffinePart> affine;
};

struct SwitchedSystem {
  int n = 0;            // state dimension
  double tau = 0.0;     // switching period
  int substeps = 1;     // sub-sampling steps per period
  std::vector<Mode> modes;

  const Mode& mode(int id) const { return modes.at(static_cast<std::size_t>(id - 1)); }
  int num_modes() const { return static_cast<int>(modes.size()); }
  double h() const { return tau / substeps; }
};

// Mode index sequence, applied left to right, one period each.
using Pattern = std::vector<int>;

std::string pattern_to_string(const Pattern& p);

// Per-mode certified constants.
//   L: Lipschitz constant of the field on S
//   M: sup of ||f|| on S;  C = L * M
//   lambda: one-sided Lipschitz constant on T
struct ModeConstants {
  double lambda = 0.0;
  double L = 0.0;
  double C = 0.0;
  double M = 0.0;
};

enum class ConstantsSource { Estimated, ExactAffine, Override };

struct ModeConstantsReport {
  int mode_id = 0;
  ModeConstants values;
  ConstantsSource lambda_source = ConstantsSource::Estimated;
  ConstantsSource L_source = ConstantsSource::Estimated;
  // soundness sampling diagnostics
  double max_ratio_L = 0.0;       // largest ||f(y)-f(x)||/||y-x|| seen in the check
  double max_ratio_lambda = 0.0;  // largest OSL ratio seen in the check
  double max_norm_f = 0.0;        // largest ||f(x)|| seen over S in the check
  bool sound = true;
};

struct ConstantsTable {
  std::vector<ModeConstants> per_mode;  // index = mode id - 1
  Box T;                                // domain used for lambda
  std::vector<ModeConstantsReport> reports;

  const ModeConstants& of(int mode_id) const {
    return per_mode.at(static_cast<std::size_t>(mode_id - 1));
  }
  bool all_sound() const {
    for (const auto& r : reports)
      if (!r.sound) return false;
    return true;
  }
};

// Reach tube sampled at sub-step boundaries; t strictly increasing from 0.
struct TubeSample {
  double t = 0.0;
  std::vector<double> center;
  double radius = 0.0;
};

struct ErrorTube {
  std::vector<TubeSample> samples;
};

// Evidence gathered while certifying one pattern from one ball.
struct StepEvidence {
  double t = 0.0;
  double margin_S = 0.0;       // ball_in_box margin against S at this sub-step
  double convexity_min = 0.0;  // min sampled second difference for this sub-step
};

enum class FailureKind {
  None,
  BallNotInS,        // initial covering ball already outside S
  LeftS,             // some sub-step ball not contained in S
  FinalNotInTarget,  // pattern ran to completion but final ball misses target
  ConvexityFailed,   // second-derivative positivity test failed
  NoPattern,         // search exhausted all patterns up to the length bound
};

std::string failure_kind_name(FailureKind k);

struct CheckResult {
  bool ok = false;
  FailureKind failure = FailureKind::None;
  int fail_step = -1;  // global sub-step index of the first violation
  std::vector<StepEvidence> steps;
  double final_margin_target = 0.0;
  ErrorTube tube;
};

struct BallCertificate {
  int index = 0;  // row-major covering index
  Ball ball;
  Pattern pattern;  // empty when failed
  bool certified = false;
  // failure diagnostics (certified == false)
  FailureKind failure = FailureKind::None;
  long patterns_tried = 0;
  long count_left_S = 0;
  long count_final_not_in_target = 0;
  long count_convexity = 0;
  // evidence (certified == true)
  std::vector<StepEvidence> steps;
  double final_margin_target = 0.0;
};

enum class ControllerStatus { Complete, Partial };

// One synthesized covering-with-patterns for a (source region -> target) leg.
struct Controller {
  std::string from_name;  // "R" or "R2"
  std::string to_name;
  Box source;
  Box target;
  std::vector<int> grid;   // cells per axis
  double delta = 0.0;      // common covering radius
  std::vector<BallCertificate> balls;  // row-major order
  ControllerStatus status = ControllerStatus::Partial;

  int num_certified() const {
    int k = 0;
    for (const auto& b : balls) k += b.certified;
    return k;
  }
};

}  // namespace osl
