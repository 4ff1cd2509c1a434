#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "osl/geometry.hpp"
#include "osl/system.hpp"

namespace osl {

struct EstimatorConfig {
  int samples = 20000;       // random pairs (or points, for M) per mode
  int refine_iters = 200;    // pattern-search iterations per restart
  int refine_seeds = 16;     // multi-start restarts, seeded by the best samples
  double eta = 1.05;         // multiplicative inflation for L, C, M
  double eps_lambda = 1e-6;  // additive inflation floor for lambda
  std::uint64_t rng_seed = 1;
};

// Sampled Lipschitz constant of the field over S, inflated by eta.  Modes
// carrying an affine tag get the exact spectral norm of A instead (power
// iteration on A^T A, no inflation).
double estimate_lipschitz(const Mode& mode, const Box& S, const EstimatorConfig& cfg);

struct CMEstimate {
  double C = 0.0;
  double M = 0.0;
};

// M = inflated max of ||f|| over S (sampling + refinement), C = L * M.
CMEstimate estimate_C(const Mode& mode, const Box& S, double L, const EstimatorConfig& cfg);

// Sampled one-sided Lipschitz constant over T:
// max <f(y)-f(x), y-x> / ||y-x||^2, inflated upward sign-aware:
// lambda + |lambda|*(eta-1) + eps.  Affine-tagged modes return the exact
// value from exact_osl_affine uninflated.
double estimate_osl(const Mode& mode, const Box& T, const EstimatorConfig& cfg);

// Max eigenvalue of (A + A^T)/2 (row-major A).
double exact_osl_affine(const std::vector<double>& A, int n);

struct SoundnessSample {
  bool ok = true;
  double max_ratio_L = 0.0;
  double max_ratio_lambda = 0.0;
  double max_norm_f = 0.0;  // largest ||f(x)|| seen over S
};

// 1e5 fresh pairs; any pair violating the claimed L (over S) or lambda
// (over T) beyond rounding slack marks the table unsound.
SoundnessSample soundness_check(const Mode& mode, const Box& S, const Box& T,
                                double L, double lambda, const EstimatorConfig& cfg);

struct ConstantsOverride {
  double lambda = 0.0;
  double L = 0.0;
  double C = 0.0;
};

// Full pipeline: M_j over S for all modes, T = inflate(S, tau * max_j M_j),
// then per-mode L, lambda, C with overrides applied verbatim where given.
// Every mode, overridden or not, goes through the soundness sampling check.
ConstantsTable compute_constants(const SwitchedSystem& sys, const Box& S,
                                 const std::map<int, ConstantsOverride>& overrides,
                                 const EstimatorConfig& cfg);

}  // namespace osl
