#include "osl/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "osl/linalg.hpp"
#include "osl/rng.hpp"

namespace osl {

namespace {

// stream tags for per-(seed, mode, purpose) RNG derivation
enum : std::uint64_t { kStreamM = 1, kStreamL = 2, kStreamOsl = 3, kStreamSound = 4 };

// Coordinate pattern search maximizing obj over box; obj returning -inf
// rejects a move.  Deterministic.
template <typename F>
double pattern_search(std::vector<double> x, const Box& box, F&& obj, int iters) {
  int n = box.dim();
  std::vector<double> step(n);
  for (int i = 0; i < n; ++i) step[i] = 0.25 * box.width(i);
  double best = obj(x);
  for (int it = 0; it < iters; ++it) {
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      if (step[i] == 0.0) continue;
      double saved = x[i];
      for (double dir : {+1.0, -1.0}) {
        double cand = std::clamp(saved + dir * step[i], box.lo[i], box.hi[i]);
        if (cand == saved) continue;
        x[i] = cand;
        double v = obj(x);
        if (v > best) {
          best = v;
          improved = true;
          break;
        }
        x[i] = saved;
      }
    }
    if (!improved)
      for (double& s : step) s *= 0.5;
  }
  return best;
}

Box pair_box(const Box& S) {
  Box b;
  b.lo = S.lo;
  b.hi = S.hi;
  b.lo.insert(b.lo.end(), S.lo.begin(), S.lo.end());
  b.hi.insert(b.hi.end(), S.hi.begin(), S.hi.end());
  return b;
}

// Maximizes a pair ratio over S x S by sampling + multi-start refinement.
// degenerate pairs (closer than 1e-9 * diam) are resampled / rejected.
template <typename Ratio>
double max_pair_ratio(const Mode& mode, const Box& S, const EstimatorConfig& cfg,
                      std::uint64_t stream, Ratio&& ratio) {
  const int n = S.dim();
  const double min_sep = 1e-9 * S.diameter();
  Rng rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(mode.id), stream));

  std::vector<double> fx(n), fy(n);
  auto eval_ratio = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double d2 = 0;
    for (int i = 0; i < n; ++i) {
      double d = y[i] - x[i];
      d2 += d * d;
    }
    if (d2 < min_sep * min_sep) return -std::numeric_limits<double>::infinity();
    eval_field_into(mode.field, x, fx);
    eval_field_into(mode.field, y, fy);
    return ratio(fx, fy, x, y, d2);
  };

  struct Start {
    double value;
    std::vector<double> xy;
  };
  std::vector<Start> starts;

  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.samples; ++k) {
    std::vector<double> x = rng.point_in_box(S);
    std::vector<double> y = rng.point_in_box(S);
    double v = eval_ratio(x, y);
    int tries = 0;
    while (std::isinf(v) && tries++ < 64) {
      y = rng.point_in_box(S);
      v = eval_ratio(x, y);
    }
    if (std::isinf(v)) continue;
    best = std::max(best, v);
    std::vector<double> xy = x;
    xy.insert(xy.end(), y.begin(), y.end());
    starts.push_back({v, std::move(xy)});
    std::push_heap(starts.begin(), starts.end(),
                   [](const Start& a, const Start& b) { return a.value > b.value; });
    if (static_cast<int>(starts.size()) > cfg.refine_seeds) {
      std::pop_heap(starts.begin(), starts.end(),
                    [](const Start& a, const Start& b) { return a.value > b.value; });
      starts.pop_back();
    }
  }
  if (starts.empty())
    throw std::runtime_error("constants estimation: no non-degenerate samples");

  Box bb = pair_box(S);
  auto obj = [&](const std::vector<double>& xy) {
    std::vector<double> x(xy.begin(), xy.begin() + n);
    std::vector<double> y(xy.begin() + n, xy.end());
    return eval_ratio(x, y);
  };
  std::sort(starts.begin(), starts.end(),
            [](const Start& a, const Start& b) { return a.value > b.value; });
  for (const Start& s : starts)
    best = std::max(best, pattern_search(s.xy, bb, obj, cfg.refine_iters));
  return best;
}

double lipschitz_ratio_max(const Mode& mode, const Box& S, const EstimatorConfig& cfg) {
  return max_pair_ratio(mode, S, cfg, kStreamL,
                        [](const std::vector<double>& fx, const std::vector<double>& fy,
                           const std::vector<double>&, const std::vector<double>&,
                           double d2) {
                          double df2 = 0;
                          for (std::size_t i = 0; i < fx.size(); ++i) {
                            double d = fy[i] - fx[i];
                            df2 += d * d;
                          }
                          return std::sqrt(df2 / d2);
                        });
}

double osl_ratio_max(const Mode& mode, const Box& T, const EstimatorConfig& cfg) {
  return max_pair_ratio(mode, T, cfg, kStreamOsl,
                        [](const std::vector<double>& fx, const std::vector<double>& fy,
                           const std::vector<double>& x, const std::vector<double>& y,
                           double d2) {
                          double dot = 0;
                          for (std::size_t i = 0; i < fx.size(); ++i)
                            dot += (fy[i] - fx[i]) * (y[i] - x[i]);
                          return dot / d2;
                        });
}

double max_norm_raw(const Mode& mode, const Box& S, const EstimatorConfig& cfg) {
  const int n = S.dim();
  Rng rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(mode.id), kStreamM));
  std::vector<double> f(n);
  auto obj = [&](const std::vector<double>& x) {
    eval_field_into(mode.field, x, f);
    double s = 0;
    for (double v : f) s += v * v;
    return std::sqrt(s);
  };

  struct Start {
    double value;
    std::vector<double> x;
  };
  std::vector<Start> starts;
  double best = 0.0;
  for (int k = 0; k < cfg.samples; ++k) {
    std::vector<double> x = rng.point_in_box(S);
    double v = obj(x);
    best = std::max(best, v);
    starts.push_back({v, std::move(x)});
    std::push_heap(starts.begin(), starts.end(),
                   [](const Start& a, const Start& b) { return a.value > b.value; });
    if (static_cast<int>(starts.size()) > cfg.refine_seeds) {
      std::pop_heap(starts.begin(), starts.end(),
                    [](const Start& a, const Start& b) { return a.value > b.value; });
      starts.pop_back();
    }
  }
  std::sort(starts.begin(), starts.end(),
            [](const Start& a, const Start& b) { return a.value > b.value; });
  for (const Start& s : starts)
    best = std::max(best, pattern_search(s.x, S, obj, cfg.refine_iters));
  return best;
}

double inflate_lambda(double raw, const EstimatorConfig& cfg) {
  return raw + std::fabs(raw) * (cfg.eta - 1.0) + cfg.eps_lambda;
}

}  // namespace

double exact_osl_affine(const std::vector<double>& A, int n) {
  return max_sym_eigenvalue(symmetric_part(A, n), n);
}

double estimate_lipschitz(const Mode& mode, const Box& S, const EstimatorConfig& cfg) {
  if (mode.affine) return spectral_norm(mode.affine->A, mode.affine->n);
  return lipschitz_ratio_max(mode, S, cfg) * cfg.eta;
}

CMEstimate estimate_C(const Mode& mode, const Box& S, double L, const EstimatorConfig& cfg) {
  CMEstimate out;
  out.M = max_norm_raw(mode, S, cfg) * cfg.eta;
  out.C = L * out.M;
  return out;
}

double estimate_osl(const Mode& mode, const Box& T, const EstimatorConfig& cfg) {
  if (mode.affine) return exact_osl_affine(mode.affine->A, mode.affine->n);
  return inflate_lambda(osl_ratio_max(mode, T, cfg), cfg);
}

SoundnessSample soundness_check(const Mode& mode, const Box& S, const Box& T,
                                double L, double lambda, const EstimatorConfig& cfg) {
  constexpr int kPairs = 100000;
  const int n = S.dim();
  SoundnessSample out;
  Rng rng(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(mode.id), kStreamSound));
  std::vector<double> fx(n), fy(n);

  auto run = [&](const Box& box, bool osl, double bound, double& max_seen) {
    const double min_sep = 1e-9 * box.diameter();
    const double slack = 1e-9 * std::max(1.0, std::fabs(bound));
    for (int k = 0; k < kPairs; ++k) {
      std::vector<double> x = rng.point_in_box(box);
      std::vector<double> y = rng.point_in_box(box);
      double d2 = 0;
      for (int i = 0; i < n; ++i) {
        double d = y[i] - x[i];
        d2 += d * d;
      }
      if (d2 < min_sep * min_sep) continue;
      eval_field_into(mode.field, x, fx);
      eval_field_into(mode.field, y, fy);
      double r;
      if (osl) {
        double dot = 0;
        for (int i = 0; i < n; ++i) dot += (fy[i] - fx[i]) * (y[i] - x[i]);
        r = dot / d2;
      } else {
        double nx = 0, ny = 0;
        double df2 = 0;
        for (int i = 0; i < n; ++i) {
          double d = fy[i] - fx[i];
          df2 += d * d;
          nx += fx[i] * fx[i];
          ny += fy[i] * fy[i];
        }
        r = std::sqrt(df2 / d2);
        out.max_norm_f = std::max(out.max_norm_f, std::sqrt(std::max(nx, ny)));
      }
      max_seen = std::max(max_seen, r);
      if (r > bound + slack) out.ok = false;
    }
  };

  out.max_ratio_L = 0.0;
  out.max_ratio_lambda = -std::numeric_limits<double>::infinity();
  run(S, false, L, out.max_ratio_L);
  run(T, true, lambda, out.max_ratio_lambda);
  return out;
}

ConstantsTable compute_constants(const SwitchedSystem& sys, const Box& S,
                                 const std::map<int, ConstantsOverride>& overrides,
                                 const EstimatorConfig& cfg) {
  ConstantsTable table;
  const int nm = sys.num_modes();
  table.per_mode.resize(nm);
  table.reports.resize(nm);

  // M first: T depends on the largest inflated M
  double max_M = 0.0;
  for (int i = 0; i < nm; ++i) {
    const Mode& mode = sys.modes[i];
    double M = max_norm_raw(mode, S, cfg) * cfg.eta;
    table.per_mode[i].M = M;
    max_M = std::max(max_M, M);
  }
  table.T = inflate_box(S, sys.tau * max_M);

  for (int i = 0; i < nm; ++i) {
    const Mode& mode = sys.modes[i];
    ModeConstants& mc = table.per_mode[i];
    ModeConstantsReport& rep = table.reports[i];
    rep.mode_id = mode.id;

    auto ov = overrides.find(mode.id);
    if (ov != overrides.end()) {
      mc.lambda = ov->second.lambda;
      mc.L = ov->second.L;
      mc.C = ov->second.C;
      rep.lambda_source = ConstantsSource::Override;
      rep.L_source = ConstantsSource::Override;
    } else {
      mc.L = estimate_lipschitz(mode, S, cfg);
      rep.L_source = mode.affine ? ConstantsSource::ExactAffine : ConstantsSource::Estimated;
      mc.lambda = estimate_osl(mode, table.T, cfg);
      rep.lambda_source =
          mode.affine ? ConstantsSource::ExactAffine : ConstantsSource::Estimated;
      // lambda was taken over T, L over the smaller S; a lambda above L is
      // still a valid Lipschitz bound, so lift L to keep lambda <= L
      if (mc.lambda > mc.L) mc.L = mc.lambda;
      mc.C = mc.L * mc.M;
    }

    SoundnessSample sound = soundness_check(mode, S, table.T, mc.L, mc.lambda, cfg);
    rep.values = mc;
    rep.max_ratio_L = sound.max_ratio_L;
    rep.max_ratio_lambda = sound.max_ratio_lambda;
    rep.max_norm_f = sound.max_norm_f;
    rep.sound = sound.ok;
    // C must dominate L*||f(x)|| on S (it is L*sup||f|| by definition);
    // guards an override that understates C.
    if (mc.L * sound.max_norm_f > mc.C + 1e-9 * std::max(1.0, mc.C)) rep.sound = false;
  }
  return table;
}

}  // namespace osl
