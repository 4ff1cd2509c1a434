#pragma once

#include <optional>
#include <vector>

#include "osl/system.hpp"

namespace osl {

// One synthesis leg: cover `source` with balls and steer every ball into
// `target` while the whole tube stays inside S.
struct SynthesisProblem {
  const SwitchedSystem* sys = nullptr;
  const ConstantsTable* table = nullptr;
  Box S;
  Box source;
  Box target;
  std::vector<int> grid;  // cells per axis
  int max_len = 1;        // pattern length bound K
};

// Uniform grid covering of `region`: grid[i] cells along axis i, ball centers
// at cell centers, radius = half the cell diagonal (so balls cover the cells).
// Row-major order, last axis fastest.
std::vector<Ball> cover_region(const Box& region, const std::vector<int>& grid);

// Full certification check of one pattern from one ball, with per-sub-step
// evidence.  Stops at the first violation.
CheckResult check_pattern(const SynthesisProblem& prob, const Ball& start,
                          const Pattern& pattern);

struct SearchOutcome {
  std::optional<Pattern> pattern;
  long patterns_tried = 0;
  long count_left_S = 0;
  long count_final_not_in_target = 0;
  long count_convexity = 0;
};

// Breadth-first search over patterns up to length max_len, children in mode-id
// order, so the result is the shortest certified pattern and lexicographically
// least among those.  Prefixes whose tube already violates S or convexity are
// pruned (every violation is inherited by every extension).
SearchOutcome find_pattern(const SynthesisProblem& prob, const Ball& start);

// Covers prob.source and searches a pattern per ball.  `jobs` worker threads;
// results are keyed by ball index, so output is independent of scheduling.
Controller synthesize_leg(const SynthesisProblem& prob, const char* from_name,
                          const char* to_name, int jobs);

}  // namespace osl
