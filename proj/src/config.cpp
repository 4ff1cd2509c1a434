#include "osl/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "osl/expr.hpp"
#include "osl/rng.hpp"

namespace osl {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing required field");
  return *it;
}

const json* member_opt(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const json& get_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) fail(join(path, it.key()), "unknown field");
  }
}

Box box_from_json(const json& j, const std::string& path, int n) {
  get_array(j, path);
  if (static_cast<int>(j.size()) != n)
    fail(path, "expected " + std::to_string(n) + " axis intervals");
  Box b;
  b.lo.resize(n);
  b.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const std::string ap = path + "[" + std::to_string(i) + "]";
    const json& axis = j[static_cast<std::size_t>(i)];
    if (!axis.is_array() || axis.size() != 2) fail(ap, "expected [lo, hi]");
    b.lo[i] = get_double(axis[0], ap + "[0]");
    b.hi[i] = get_double(axis[1], ap + "[1]");
    if (!(b.lo[i] <= b.hi[i])) fail(ap, "lo must be <= hi");
    if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) fail(ap, "bounds must be finite");
  }
  return b;
}

json box_to_json(const Box& b) {
  json j = json::array();
  for (std::size_t i = 0; i < b.lo.size(); ++i) j.push_back({b.lo[i], b.hi[i]});
  return j;
}

std::vector<double> doubles_from_json(const json& j, const std::string& path,
                                      std::size_t count) {
  get_array(j, path);
  if (j.size() != count)
    fail(path, "expected " + std::to_string(count) + " numbers");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = get_double(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mode mode_from_json(const json& j, const std::string& path, int n) {
  check_keys(j, path, {"id", "field", "affine"});
  Mode m;
  m.id = static_cast<int>(get_integer(member(j, path, "id"), join(path, "id")));
  const json& field = get_array(member(j, path, "field"), join(path, "field"));
  if (static_cast<int>(field.size()) != n)
    fail(join(path, "field"), "expected " + std::to_string(n) + " component expressions");
  for (int i = 0; i < n; ++i) {
    const std::string fp = join(path, "field") + "[" + std::to_string(i) + "]";
    const std::string src = get_string(field[static_cast<std::size_t>(i)], fp);
    try {
      m.field.push_back(parse_expression(src, n));
    } catch (const parse_error& e) {
      fail(fp, std::string(e.what()) + " (offset " + std::to_string(e.offset) + ")");
    }
  }
  if (const json* aff = member_opt(j, path, "affine")) {
    const std::string ap = join(path, "affine");
    check_keys(*aff, ap, {"A", "b"});
    AffinePart a;
    a.n = n;
    a.A = doubles_from_json(member(*aff, ap, "A"), join(ap, "A"),
                            static_cast<std::size_t>(n) * n);
    a.b = doubles_from_json(member(*aff, ap, "b"), join(ap, "b"),
                            static_cast<std::size_t>(n));
    m.affine = std::move(a);
  }
  return m;
}

// The affine tag is a structural claim; verify it against the expressions on
// sampled points of (a neighborhood of) S.
void check_affine_tag(const Mode& m, const Box& S, const std::string& path) {
  if (!m.affine) return;
  const int n = S.dim();
  Rng rng(mix_seed(0xAFF1, static_cast<std::uint64_t>(m.id)));
  const Box probe = inflate_box(S, 0.5 * S.diameter() + 1.0);
  for (int k = 0; k < 64; ++k) {
    const std::vector<double> x = rng.point_in_box(probe);
    std::vector<double> want = m.affine->apply(x);
    std::vector<double> got;
    try {
      got = eval_field(m.field, x);
    } catch (const eval_error& e) {
      fail(path, std::string("field evaluation failed during affine check: ") + e.what());
    }
    for (int i = 0; i < n; ++i)
      if (std::fabs(got[i] - want[i]) > 1e-9 * (1.0 + std::fabs(want[i])))
        fail(path, "affine tag disagrees with the field expressions at a sampled point");
  }
}

EstimatorConfig estimator_from_json(const json* j, const std::string& path) {
  EstimatorConfig cfg;
  if (!j) return cfg;
  check_keys(*j, path, {"samples", "refine_iters", "seeds", "eta", "rng_seed"});
  if (const json* v = member_opt(*j, path, "samples")) {
    cfg.samples = static_cast<int>(get_integer(*v, join(path, "samples")));
    if (cfg.samples < 1) fail(join(path, "samples"), "must be >= 1");
  }
  if (const json* v = member_opt(*j, path, "refine_iters")) {
    cfg.refine_iters = static_cast<int>(get_integer(*v, join(path, "refine_iters")));
    if (cfg.refine_iters < 1) fail(join(path, "refine_iters"), "must be >= 1");
  }
  if (const json* v = member_opt(*j, path, "seeds")) {
    cfg.refine_seeds = static_cast<int>(get_integer(*v, join(path, "seeds")));
    if (cfg.refine_seeds < 1) fail(join(path, "seeds"), "must be >= 1");
  }
  if (const json* v = member_opt(*j, path, "eta")) {
    cfg.eta = get_double(*v, join(path, "eta"));
    if (!(cfg.eta >= 1.0)) fail(join(path, "eta"), "must be >= 1");
  }
  if (const json* v = member_opt(*j, path, "rng_seed")) {
    const long s = get_integer(*v, join(path, "rng_seed"));
    if (s < 0) fail(join(path, "rng_seed"), "must be >= 0");
    cfg.rng_seed = static_cast<std::uint64_t>(s);
  }
  return cfg;
}

ProblemConfig config_from_json(const json& j, const std::string& origin) {
  check_keys(j, "", {"version", "name", "notes", "dimension", "tau", "substeps", "modes",
                     "R", "S", "R2", "grid", "max_pattern_length", "estimator",
                     "constants_override"});
  (void)origin;
  ProblemConfig c;

  if (get_string(member(j, "", "version"), "version") != kFileFormatVersion)
    fail("version", std::string("expected \"") + kFileFormatVersion + "\"");
  if (const json* v = member_opt(j, "", "name")) c.name = get_string(*v, "name");
  if (const json* v = member_opt(j, "", "notes")) c.notes = get_string(*v, "notes");

  const int n = static_cast<int>(get_integer(member(j, "", "dimension"), "dimension"));
  if (n < 1) fail("dimension", "must be >= 1");
  c.sys.n = n;

  c.sys.tau = get_double(member(j, "", "tau"), "tau");
  if (!(c.sys.tau > 0.0) || !std::isfinite(c.sys.tau)) fail("tau", "must be > 0");

  c.sys.substeps = static_cast<int>(get_integer(member(j, "", "substeps"), "substeps"));
  if (c.sys.substeps < 1) fail("substeps", "must be >= 1");

  c.S = box_from_json(member(j, "", "S"), "S", n);
  c.R = box_from_json(member(j, "", "R"), "R", n);
  if (!box_in_box(c.R, c.S)) fail("R", "must be contained in S");
  if (const json* v = member_opt(j, "", "R2")) {
    c.R2 = box_from_json(*v, "R2", n);
    if (!box_in_box(*c.R2, c.S)) fail("R2", "must be contained in S");
  }

  const json& modes = get_array(member(j, "", "modes"), "modes");
  if (modes.empty()) fail("modes", "at least one mode is required");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string mp = "modes[" + std::to_string(i) + "]";
    Mode m = mode_from_json(modes[i], mp, n);
    if (m.id != static_cast<int>(i) + 1)
      fail(join(mp, "id"), "mode ids must be 1..N in order");
    check_affine_tag(m, c.S, join(mp, "affine"));
    c.sys.modes.push_back(std::move(m));
  }

  const json& grid = get_array(member(j, "", "grid"), "grid");
  if (static_cast<int>(grid.size()) != n)
    fail("grid", "expected " + std::to_string(n) + " cell counts");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string gp = "grid[" + std::to_string(i) + "]";
    const long g = get_integer(grid[i], gp);
    if (g < 1) fail(gp, "must be >= 1");
    c.grid.push_back(static_cast<int>(g));
  }

  c.max_pattern_length = static_cast<int>(
      get_integer(member(j, "", "max_pattern_length"), "max_pattern_length"));
  if (c.max_pattern_length < 1) fail("max_pattern_length", "must be >= 1");

  c.estimator = estimator_from_json(member_opt(j, "", "estimator"), "estimator");

  if (const json* ov = member_opt(j, "", "constants_override")) {
    if (!ov->is_object()) fail("constants_override", "expected an object keyed by mode id");
    for (auto it = ov->begin(); it != ov->end(); ++it) {
      const std::string op = "constants_override." + it.key();
      int id = 0;
      try {
        std::size_t pos = 0;
        id = std::stoi(it.key(), &pos);
        if (pos != it.key().size()) throw std::invalid_argument("");
      } catch (...) {
        fail(op, "key must be a decimal mode id");
      }
      if (id < 1 || id > c.sys.num_modes()) fail(op, "mode id out of range");
      check_keys(*it, op, {"lambda", "L", "C"});
      ConstantsOverride o;
      o.lambda = get_double(member(*it, op, "lambda"), join(op, "lambda"));
      o.L = get_double(member(*it, op, "L"), join(op, "L"));
      o.C = get_double(member(*it, op, "C"), join(op, "C"));
      if (o.L < 0.0) fail(join(op, "L"), "must be >= 0");
      if (o.C < 0.0) fail(join(op, "C"), "must be >= 0");
      if (o.lambda > o.L + 1e-12 * std::max(1.0, o.L))
        fail(join(op, "lambda"), "must be <= L (one-sided bound never exceeds Lipschitz)");
      c.overrides.emplace(id, o);
    }
  }
  return c;
}

json config_to_json(const ProblemConfig& c) {
  json j;
  j["version"] = kFileFormatVersion;
  if (!c.name.empty()) j["name"] = c.name;
  if (!c.notes.empty()) j["notes"] = c.notes;
  j["dimension"] = c.sys.n;
  j["tau"] = c.sys.tau;
  j["substeps"] = c.sys.substeps;
  json modes = json::array();
  for (const Mode& m : c.sys.modes) {
    json mj;
    mj["id"] = m.id;
    json field = json::array();
    for (const Expr& e : m.field) field.push_back(pretty_print(e));
    mj["field"] = std::move(field);
    if (m.affine) {
      json aj;
      aj["A"] = m.affine->A;
      aj["b"] = m.affine->b;
      mj["affine"] = std::move(aj);
    }
    modes.push_back(std::move(mj));
  }
  j["modes"] = std::move(modes);
  j["R"] = box_to_json(c.R);
  j["S"] = box_to_json(c.S);
  if (c.R2) j["R2"] = box_to_json(*c.R2);
  j["grid"] = c.grid;
  j["max_pattern_length"] = c.max_pattern_length;
  json est;
  est["samples"] = c.estimator.samples;
  est["refine_iters"] = c.estimator.refine_iters;
  est["seeds"] = c.estimator.refine_seeds;
  est["eta"] = c.estimator.eta;
  est["rng_seed"] = c.estimator.rng_seed;
  j["estimator"] = std::move(est);
  if (!c.overrides.empty()) {
    json ov;
    for (const auto& [id, o] : c.overrides) {
      json oj;
      oj["lambda"] = o.lambda;
      oj["L"] = o.L;
      oj["C"] = o.C;
      ov[std::to_string(id)] = std::move(oj);
    }
    j["constants_override"] = std::move(ov);
  }
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << text;
  if (!out.good()) throw ConfigError(path + ": write failed");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : s) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

ProblemConfig parse_config_text(const std::string& text, const std::string& origin) {
  return config_from_json(parse_json_text(text, origin), origin);
}

ProblemConfig load_config(const std::string& path) {
  return parse_config_text(read_file(path), path);
}

std::string canonical_config_text(const ProblemConfig& c) {
  return config_to_json(c).dump(1) + "\n";
}

std::string config_hash(const ProblemConfig& c) {
  return hex64(fnv1a(canonical_config_text(c)));
}

std::string constants_source_name(ConstantsSource s) {
  switch (s) {
    case ConstantsSource::Estimated: return "estimated";
    case ConstantsSource::ExactAffine: return "exact_affine";
    case ConstantsSource::Override: return "override";
  }
  return "unknown";
}

std::string controller_status_name(ControllerStatus s) {
  return s == ControllerStatus::Complete ? "complete" : "partial";
}

namespace {

ConstantsSource source_from_name(const std::string& s, const std::string& path) {
  if (s == "estimated") return ConstantsSource::Estimated;
  if (s == "exact_affine") return ConstantsSource::ExactAffine;
  if (s == "override") return ConstantsSource::Override;
  fail(path, "unknown constants source \"" + s + "\"");
}

FailureKind failure_from_name(const std::string& s, const std::string& path) {
  for (FailureKind k : {FailureKind::None, FailureKind::BallNotInS, FailureKind::LeftS,
                        FailureKind::FinalNotInTarget, FailureKind::ConvexityFailed,
                        FailureKind::NoPattern})
    if (failure_kind_name(k) == s) return k;
  fail(path, "unknown failure kind \"" + s + "\"");
}

json constants_to_json(const ConstantsTable& t) {
  json cj;
  cj["T"] = box_to_json(t.T);
  json modes = json::array();
  for (const ModeConstantsReport& r : t.reports) {
    json mj;
    mj["id"] = r.mode_id;
    mj["lambda"] = r.values.lambda;
    mj["L"] = r.values.L;
    mj["C"] = r.values.C;
    mj["M"] = r.values.M;
    mj["lambda_source"] = constants_source_name(r.lambda_source);
    mj["L_source"] = constants_source_name(r.L_source);
    mj["max_ratio_L"] = r.max_ratio_L;
    mj["max_ratio_lambda"] = r.max_ratio_lambda;
    mj["max_norm_f"] = r.max_norm_f;
    mj["sound"] = r.sound;
    modes.push_back(std::move(mj));
  }
  cj["modes"] = std::move(modes);
  return cj;
}

ConstantsTable constants_from_json(const json& j, const std::string& path, int num_modes,
                                   int dimension) {
  check_keys(j, path, {"T", "modes"});
  ConstantsTable t;
  t.T = box_from_json(member(j, path, "T"), join(path, "T"), dimension);
  const json& modes = get_array(member(j, path, "modes"), join(path, "modes"));
  if (static_cast<int>(modes.size()) != num_modes)
    fail(join(path, "modes"), "expected one entry per mode");
  t.per_mode.resize(modes.size());
  t.reports.resize(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string mp = join(path, "modes") + "[" + std::to_string(i) + "]";
    const json& mj = modes[i];
    check_keys(mj, mp, {"id", "lambda", "L", "C", "M", "lambda_source", "L_source",
                        "max_ratio_L", "max_ratio_lambda", "max_norm_f", "sound"});
    ModeConstantsReport& r = t.reports[i];
    r.mode_id = static_cast<int>(get_integer(member(mj, mp, "id"), join(mp, "id")));
    if (r.mode_id != static_cast<int>(i) + 1) fail(join(mp, "id"), "ids must be 1..N in order");
    r.values.lambda = get_double(member(mj, mp, "lambda"), join(mp, "lambda"));
    r.values.L = get_double(member(mj, mp, "L"), join(mp, "L"));
    r.values.C = get_double(member(mj, mp, "C"), join(mp, "C"));
    r.values.M = get_double(member(mj, mp, "M"), join(mp, "M"));
    r.lambda_source = source_from_name(
        get_string(member(mj, mp, "lambda_source"), join(mp, "lambda_source")),
        join(mp, "lambda_source"));
    r.L_source = source_from_name(
        get_string(member(mj, mp, "L_source"), join(mp, "L_source")), join(mp, "L_source"));
    r.max_ratio_L = get_double(member(mj, mp, "max_ratio_L"), join(mp, "max_ratio_L"));
    r.max_ratio_lambda =
        get_double(member(mj, mp, "max_ratio_lambda"), join(mp, "max_ratio_lambda"));
    r.max_norm_f = get_double(member(mj, mp, "max_norm_f"), join(mp, "max_norm_f"));
    r.sound = get_bool(member(mj, mp, "sound"), join(mp, "sound"));
    t.per_mode[i] = r.values;
  }
  return t;
}

json controller_to_json(const Controller& c) {
  json j;
  j["from"] = c.from_name;
  j["to"] = c.to_name;
  j["source"] = box_to_json(c.source);
  j["target"] = box_to_json(c.target);
  j["grid"] = c.grid;
  j["delta"] = c.delta;
  j["status"] = controller_status_name(c.status);
  json balls = json::array();
  for (const BallCertificate& b : c.balls) {
    json bj;
    bj["index"] = b.index;
    bj["center"] = b.ball.center;
    bj["certified"] = b.certified;
    bj["pattern"] = b.pattern;
    json margins = json::array();
    json convex = json::array();
    for (const StepEvidence& ev : b.steps) {
      margins.push_back(ev.margin_S);
      convex.push_back(ev.convexity_min);
    }
    bj["margins_S"] = std::move(margins);
    bj["convexity_mins"] = std::move(convex);
    bj["final_margin_target"] = b.final_margin_target;
    bj["failure"] = failure_kind_name(b.failure);
    bj["patterns_tried"] = b.patterns_tried;
    json counts;
    counts["left_S"] = b.count_left_S;
    counts["final_not_in_target"] = b.count_final_not_in_target;
    counts["convexity"] = b.count_convexity;
    bj["counts"] = std::move(counts);
    balls.push_back(std::move(bj));
  }
  j["balls"] = std::move(balls);
  return j;
}

Controller controller_from_json(const json& j, const std::string& path,
                                const ProblemConfig& cfg) {
  check_keys(j, path,
             {"from", "to", "source", "target", "grid", "delta", "status", "balls"});
  const int n = cfg.sys.n;
  Controller c;
  c.from_name = get_string(member(j, path, "from"), join(path, "from"));
  c.to_name = get_string(member(j, path, "to"), join(path, "to"));
  c.source = box_from_json(member(j, path, "source"), join(path, "source"), n);
  c.target = box_from_json(member(j, path, "target"), join(path, "target"), n);
  const json& grid = get_array(member(j, path, "grid"), join(path, "grid"));
  long total = 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const long g = get_integer(grid[i], join(path, "grid"));
    if (g < 1) fail(join(path, "grid"), "cell counts must be >= 1");
    c.grid.push_back(static_cast<int>(g));
    total *= g;
  }
  if (static_cast<int>(grid.size()) != n) fail(join(path, "grid"), "wrong dimension");
  c.delta = get_double(member(j, path, "delta"), join(path, "delta"));
  const std::string status =
      get_string(member(j, path, "status"), join(path, "status"));
  if (status != "complete" && status != "partial")
    fail(join(path, "status"), "expected \"complete\" or \"partial\"");

  const json& balls = get_array(member(j, path, "balls"), join(path, "balls"));
  if (static_cast<long>(balls.size()) != total)
    fail(join(path, "balls"), "expected one ball per grid cell");
  int certified = 0;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const std::string bp = join(path, "balls") + "[" + std::to_string(i) + "]";
    const json& bj = balls[i];
    check_keys(bj, bp,
               {"index", "center", "certified", "pattern", "margins_S", "convexity_mins",
                "final_margin_target", "failure", "patterns_tried", "counts"});
    BallCertificate b;
    b.index = static_cast<int>(get_integer(member(bj, bp, "index"), join(bp, "index")));
    if (b.index != static_cast<int>(i)) fail(join(bp, "index"), "must match position");
    b.ball.center = doubles_from_json(member(bj, bp, "center"), join(bp, "center"),
                                      static_cast<std::size_t>(n));
    b.ball.radius = c.delta;
    b.certified = get_bool(member(bj, bp, "certified"), join(bp, "certified"));
    const json& pat = get_array(member(bj, bp, "pattern"), join(bp, "pattern"));
    for (std::size_t k = 0; k < pat.size(); ++k) {
      const long id = get_integer(pat[k], join(bp, "pattern"));
      if (id < 1 || id > cfg.sys.num_modes())
        fail(join(bp, "pattern"), "mode id out of range");
      b.pattern.push_back(static_cast<int>(id));
    }
    if (b.certified && b.pattern.empty())
      fail(join(bp, "pattern"), "certified ball requires a pattern");
    if (b.certified && static_cast<int>(b.pattern.size()) > cfg.max_pattern_length)
      fail(join(bp, "pattern"), "longer than max_pattern_length");

    const json& margins = get_array(member(bj, bp, "margins_S"), join(bp, "margins_S"));
    const json& convex =
        get_array(member(bj, bp, "convexity_mins"), join(bp, "convexity_mins"));
    if (margins.size() != convex.size())
      fail(join(bp, "convexity_mins"), "must match margins_S length");
    if (b.certified &&
        margins.size() != b.pattern.size() * static_cast<std::size_t>(cfg.sys.substeps))
      fail(join(bp, "margins_S"), "expected one entry per sub-step of the pattern");
    const double h = cfg.sys.h();
    for (std::size_t k = 0; k < margins.size(); ++k) {
      StepEvidence ev;
      ev.t = (static_cast<double>(k) + 1.0) * h;
      ev.margin_S = get_double(margins[k], join(bp, "margins_S"));
      ev.convexity_min = get_double(convex[k], join(bp, "convexity_mins"));
      b.steps.push_back(ev);
    }
    b.final_margin_target =
        get_double(member(bj, bp, "final_margin_target"), join(bp, "final_margin_target"));
    b.failure = failure_from_name(
        get_string(member(bj, bp, "failure"), join(bp, "failure")), join(bp, "failure"));
    if (b.certified && b.failure != FailureKind::None)
      fail(join(bp, "failure"), "certified ball cannot carry a failure");
    if (!b.certified && b.failure == FailureKind::None)
      fail(join(bp, "failure"), "failed ball requires a failure kind");
    b.patterns_tried = get_integer(member(bj, bp, "patterns_tried"), join(bp, "patterns_tried"));
    const json& counts = member(bj, bp, "counts");
    const std::string cp = join(bp, "counts");
    check_keys(counts, cp, {"left_S", "final_not_in_target", "convexity"});
    b.count_left_S = get_integer(member(counts, cp, "left_S"), join(cp, "left_S"));
    b.count_final_not_in_target =
        get_integer(member(counts, cp, "final_not_in_target"), join(cp, "final_not_in_target"));
    b.count_convexity = get_integer(member(counts, cp, "convexity"), join(cp, "convexity"));
    certified += b.certified;
    c.balls.push_back(std::move(b));
  }
  c.status = (certified == static_cast<int>(balls.size())) ? ControllerStatus::Complete
                                                           : ControllerStatus::Partial;
  if (controller_status_name(c.status) != status)
    fail(join(path, "status"), "inconsistent with per-ball certification");
  return c;
}

}  // namespace

void write_controller_file(const std::string& path, const ControllerArtifact& a) {
  json j;
  j["version"] = kFileFormatVersion;
  j["kind"] = "controller";
  j["config_hash"] = a.hash;
  j["config"] = config_to_json(a.config);
  j["constants"] = constants_to_json(a.constants);
  json ctrls = json::array();
  for (const Controller& c : a.controllers) ctrls.push_back(controller_to_json(c));
  j["controllers"] = std::move(ctrls);
  write_file(path, j.dump(1) + "\n");
}

ControllerArtifact read_controller_file(const std::string& path) {
  const json j = parse_json_text(read_file(path), path);
  check_keys(j, "", {"version", "kind", "config_hash", "config", "constants", "controllers"});
  if (get_string(member(j, "", "version"), "version") != kFileFormatVersion)
    fail("version", std::string("expected \"") + kFileFormatVersion + "\"");
  if (get_string(member(j, "", "kind"), "kind") != "controller")
    fail("kind", "expected \"controller\"");

  ControllerArtifact a;
  a.config = config_from_json(member(j, "", "config"), path);
  a.hash = get_string(member(j, "", "config_hash"), "config_hash");
  if (a.hash != config_hash(a.config))
    fail("config_hash", "does not match the embedded config");
  a.constants = constants_from_json(member(j, "", "constants"), "constants",
                                    a.config.sys.num_modes(), a.config.sys.n);
  const json& ctrls = get_array(member(j, "", "controllers"), "controllers");
  if (ctrls.empty()) fail("controllers", "at least one controller is required");
  for (std::size_t i = 0; i < ctrls.size(); ++i)
    a.controllers.push_back(controller_from_json(
        ctrls[i], "controllers[" + std::to_string(i) + "]", a.config));
  return a;
}

void write_constants_report(const std::string& path, const ProblemConfig& c,
                            const ConstantsTable& t) {
  json j;
  j["version"] = kFileFormatVersion;
  j["kind"] = "constants_report";
  j["config_hash"] = config_hash(c);
  if (!c.name.empty()) j["name"] = c.name;
  j["constants"] = constants_to_json(t);
  j["all_sound"] = t.all_sound();
  write_file(path, j.dump(1) + "\n");
}

}  // namespace osl
