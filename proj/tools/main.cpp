// osl-synth: guaranteed controller synthesis for sampled switched systems.
//
// Subcommands:
//   constants <config>           constants table + soundness sampling verdict
//   synth     <config>           synthesize controllers, write the artifact
//   simulate  <controller>       closed-loop runs against the RK4 oracle
//   tube      <config>           error tube for one ball and pattern, as CSV
//   check     <file>             schema validation of a config or controller
//
// Exit codes: 0 success, 1 input/config error, 2 constants soundness failure,
// 3 incomplete synthesis (or simulation violations).

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "osl/config.hpp"
#include "osl/constants.hpp"
#include "osl/euler.hpp"
#include "osl/expr.hpp"
#include "osl/rng.hpp"
#include "osl/sim.hpp"
#include "osl/synth.hpp"

namespace {

using namespace osl;

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
    if (pos != item.size()) throw std::invalid_argument("trailing junk in number: " + item);
  }
  return out;
}

Pattern parse_pattern_arg(std::string s, int num_modes) {
  for (char& c : s)
    if (c == ',') c = ' ';
  Pattern p;
  std::stringstream ss(s);
  int id = 0;
  while (ss >> id) {
    if (id < 1 || id > num_modes)
      throw std::invalid_argument("pattern mode id out of range: " + std::to_string(id));
    p.push_back(id);
  }
  if (!ss.eof()) throw std::invalid_argument("pattern must be a list of mode ids");
  if (p.empty()) throw std::invalid_argument("pattern must be nonempty");
  return p;
}

void print_constants(const ConstantsTable& table) {
  std::printf("T = [");
  for (int i = 0; i < table.T.dim(); ++i)
    std::printf("%s[%s, %s]", i ? ", " : "", format_double(table.T.lo[i]).c_str(),
                format_double(table.T.hi[i]).c_str());
  std::printf("]\n");
  for (const ModeConstantsReport& r : table.reports) {
    std::printf("mode %d: lambda=%- .10g (%s)  L=%.10g (%s)  C=%.10g  M=%.10g  %s\n",
                r.mode_id, r.values.lambda, constants_source_name(r.lambda_source).c_str(),
                r.values.L, constants_source_name(r.L_source).c_str(), r.values.C,
                r.values.M, r.sound ? "sound" : "UNSOUND");
    if (!r.sound)
      std::printf("  observed max ratios: L %.10g, lambda %.10g, ||f|| %.10g\n",
                  r.max_ratio_L, r.max_ratio_lambda, r.max_norm_f);
  }
}

int cmd_constants(const std::string& config_path, const std::string& out_path) {
  ProblemConfig cfg = load_config(config_path);
  ConstantsTable table = compute_constants(cfg.sys, cfg.S, cfg.overrides, cfg.estimator);
  print_constants(table);
  if (!out_path.empty()) {
    write_constants_report(out_path, cfg, table);
    std::printf("report written to %s\n", out_path.c_str());
  }
  return table.all_sound() ? 0 : 2;
}

std::vector<SynthesisProblem> make_problems(const ProblemConfig& cfg,
                                            const ConstantsTable& table,
                                            std::vector<std::pair<const char*, const char*>>& names) {
  std::vector<SynthesisProblem> probs;
  SynthesisProblem base;
  base.sys = &cfg.sys;
  base.table = &table;
  base.S = cfg.S;
  base.grid = cfg.grid;
  base.max_len = cfg.max_pattern_length;
  if (cfg.R2) {
    SynthesisProblem p1 = base;
    p1.source = cfg.R;
    p1.target = *cfg.R2;
    probs.push_back(p1);
    names.push_back({"R", "R2"});
    SynthesisProblem p2 = base;
    p2.source = *cfg.R2;
    p2.target = cfg.R;
    probs.push_back(p2);
    names.push_back({"R2", "R"});
  } else {
    base.source = cfg.R;
    base.target = cfg.R;
    probs.push_back(base);
    names.push_back({"R", "R"});
  }
  return probs;
}

int cmd_synth(const std::string& config_path, const std::string& out_path, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  ProblemConfig cfg = load_config(config_path);
  ConstantsTable table = compute_constants(cfg.sys, cfg.S, cfg.overrides, cfg.estimator);
  print_constants(table);
  if (!table.all_sound()) {
    std::fprintf(stderr, "error: constants failed the soundness sampling check\n");
    return 2;
  }

  std::vector<std::pair<const char*, const char*>> names;
  std::vector<SynthesisProblem> probs = make_problems(cfg, table, names);

  ControllerArtifact artifact;
  artifact.config = cfg;
  artifact.hash = config_hash(cfg);
  artifact.constants = table;

  bool complete = true;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    Controller ctrl = synthesize_leg(probs[i], names[i].first, names[i].second, jobs);
    const int certified = ctrl.num_certified();
    const int total = static_cast<int>(ctrl.balls.size());
    std::printf("%s -> %s: %d/%d balls certified (%s)\n", ctrl.from_name.c_str(),
                ctrl.to_name.c_str(), certified, total,
                controller_status_name(ctrl.status).c_str());

    std::map<std::size_t, int> histogram;
    for (const BallCertificate& b : ctrl.balls)
      if (b.certified) ++histogram[b.pattern.size()];
    for (const auto& [len, count] : histogram)
      std::printf("  length %zu: %d balls\n", len, count);
    for (const BallCertificate& b : ctrl.balls) {
      if (b.certified) continue;
      std::printf("  ball %d center (", b.index);
      for (std::size_t k = 0; k < b.ball.center.size(); ++k)
        std::printf("%s%s", k ? ", " : "", format_double(b.ball.center[k]).c_str());
      std::printf("): %s (tried %ld, left_S %ld, final_not_in_target %ld, convexity %ld)\n",
                  failure_kind_name(b.failure).c_str(), b.patterns_tried, b.count_left_S,
                  b.count_final_not_in_target, b.count_convexity);
    }
    if (ctrl.status != ControllerStatus::Complete) complete = false;
    artifact.controllers.push_back(std::move(ctrl));
  }

  if (!out_path.empty()) {
    write_controller_file(out_path, artifact);
    std::printf("controller written to %s\n", out_path.c_str());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("wall time: %.1f s\n", secs);
  return complete ? 0 : 3;
}

struct RunResult {
  ClosedLoopResult sim;
};

int cmd_simulate(const std::string& controller_path, int runs, int cycles,
                 std::uint64_t seed, const std::string& csv_path, int jobs) {
  ControllerArtifact art = read_controller_file(controller_path);
  for (const Controller& c : art.controllers)
    if (c.status != ControllerStatus::Complete)
      throw ConfigError(controller_path + ": controller " + c.from_name + "->" + c.to_name +
                        " is not complete; cannot simulate");
  std::vector<const Controller*> legs;
  for (const Controller& c : art.controllers) legs.push_back(&c);

  std::vector<RunResult> results(static_cast<std::size_t>(runs));
  auto do_run = [&](int r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r), 0x51D));
    const std::vector<double> x0 = rng.point_in_box(legs[0]->source);
    results[static_cast<std::size_t>(r)].sim =
        closed_loop_simulate(art.config.sys, art.config.S, legs, x0, cycles);
  };
  if (jobs <= 1) {
    for (int r = 0; r < runs; ++r) do_run(r);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= runs) return;
        do_run(r);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  long violations = 0;
  long completed = 0;
  for (int r = 0; r < runs; ++r) {
    const ClosedLoopResult& res = results[static_cast<std::size_t>(r)].sim;
    completed += res.cycles_completed;
    for (const SimViolation& v : res.violations) {
      ++violations;
      std::printf("run %d cycle %d t=%s: %s at (", r, v.cycle, format_double(v.t).c_str(),
                  v.kind.c_str());
      for (std::size_t k = 0; k < v.x.size(); ++k)
        std::printf("%s%s", k ? ", " : "", format_double(v.x[k]).c_str());
      std::printf(")\n");
    }
  }
  std::printf("%d runs x %d cycles: %ld cycles completed, %ld violations\n", runs, cycles,
              completed, violations);

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigError(csv_path + ": cannot open for writing");
    const int n = art.config.sys.n;
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x_" << i;
    out << ",active_mode,ball_index,cycle";
    if (runs > 1) out << ",run";
    out << "\n";
    for (int r = 0; r < runs; ++r) {
      for (const TrajectorySample& s : results[static_cast<std::size_t>(r)].sim.trajectory) {
        out << format_double(s.t);
        for (double xi : s.x) out << ',' << format_double(xi);
        out << ',' << s.active_mode << ',' << s.ball_index << ',' << s.cycle;
        if (runs > 1) out << ',' << r;
        out << "\n";
      }
    }
    if (!out.good()) throw ConfigError(csv_path + ": write failed");
    std::printf("trajectories written to %s\n", csv_path.c_str());
  }
  return violations == 0 ? 0 : 3;
}

int cmd_tube(const std::string& config_path, const std::string& ball_arg,
             const std::string& pattern_arg, const std::string& csv_path) {
  ProblemConfig cfg = load_config(config_path);
  const int n = cfg.sys.n;
  std::vector<double> bv = split_doubles(ball_arg);
  if (static_cast<int>(bv.size()) != n + 1)
    throw std::invalid_argument("--ball expects " + std::to_string(n + 1) +
                                " comma-separated numbers (center, delta)");
  Ball ball;
  ball.center.assign(bv.begin(), bv.end() - 1);
  ball.radius = bv.back();
  if (ball.radius < 0) throw std::invalid_argument("--ball delta must be >= 0");
  Pattern pattern = parse_pattern_arg(pattern_arg, cfg.sys.num_modes());

  ConstantsTable table = compute_constants(cfg.sys, cfg.S, cfg.overrides, cfg.estimator);
  if (!table.all_sound()) {
    std::fprintf(stderr, "error: constants failed the soundness sampling check\n");
    return 2;
  }
  ErrorTube tube = tube_for_pattern(cfg.sys, table, ball, pattern);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!csv_path.empty()) {
    file.open(csv_path, std::ios::binary);
    if (!file) throw ConfigError(csv_path + ": cannot open for writing");
    os = &file;
  }
  *os << "t";
  for (int i = 1; i <= n; ++i) *os << ",center_" << i;
  *os << ",radius\n";
  for (const TubeSample& s : tube.samples) {
    *os << format_double(s.t);
    for (double ci : s.center) *os << ',' << format_double(ci);
    *os << ',' << format_double(s.radius) << "\n";
  }
  if (!csv_path.empty()) {
    if (!file.good()) throw ConfigError(csv_path + ": write failed");
    std::fprintf(stderr, "tube written to %s (%zu samples, final radius %s)\n",
                 csv_path.c_str(), tube.samples.size(),
                 format_double(tube.samples.back().radius).c_str());
  }
  return 0;
}

int cmd_check(const std::string& path) {
  // Dispatch on the "kind" field; plain configs have none.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const bool is_controller = text.find("\"kind\"") != std::string::npos &&
                             text.find("\"controller\"") != std::string::npos;
  if (is_controller) {
    ControllerArtifact a = read_controller_file(path);
    std::printf("ok: controller artifact, config %s, %zu controller(s)\n", a.hash.c_str(),
                a.controllers.size());
    for (const Controller& c : a.controllers)
      std::printf("  %s -> %s: %d/%zu certified (%s)\n", c.from_name.c_str(),
                  c.to_name.c_str(), c.num_certified(), c.balls.size(),
                  controller_status_name(c.status).c_str());
  } else {
    ProblemConfig c = parse_config_text(text, path);
    std::printf("ok: config %s (%s), %d mode(s), dimension %d\n", config_hash(c).c_str(),
                c.name.empty() ? "unnamed" : c.name.c_str(), c.sys.num_modes(), c.sys.n);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guaranteed controller synthesis via Euler error tubes"};
  app.require_subcommand(1);

  std::string config_path, controller_path, out_path, csv_path, ball_arg, pattern_arg;
  int jobs = 1, runs = 1, cycles = 10;
  std::uint64_t seed = 1;

  CLI::App* c_const = app.add_subcommand("constants", "Compute per-mode constants");
  c_const->add_option("config", config_path, "problem config")->required();
  c_const->add_option("--out", out_path, "write a JSON report");

  CLI::App* c_synth = app.add_subcommand("synth", "Synthesize controllers");
  c_synth->add_option("config", config_path, "problem config")->required();
  c_synth->add_option("--out", out_path, "controller artifact path");
  c_synth->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* c_sim = app.add_subcommand("simulate", "Closed-loop validation");
  c_sim->add_option("controller", controller_path, "controller artifact")->required();
  c_sim->add_option("--runs", runs, "independent starts")->check(CLI::PositiveNumber);
  c_sim->add_option("--cycles", cycles, "control cycles per run")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", seed, "RNG seed for starts");
  c_sim->add_option("--csv", csv_path, "trajectory CSV path");
  c_sim->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* c_tube = app.add_subcommand("tube", "Emit one error tube as CSV");
  c_tube->add_option("config", config_path, "problem config")->required();
  c_tube->add_option("--ball", ball_arg, "cx,..,cn,delta")->required();
  c_tube->add_option("--pattern", pattern_arg, "mode ids, e.g. \"1 3 2\"")->required();
  c_tube->add_option("--csv", csv_path, "output path (default stdout)");

  CLI::App* c_check = app.add_subcommand("check", "Validate a config or controller file");
  c_check->add_option("file", config_path, "file to validate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_const->parsed()) return cmd_constants(config_path, out_path);
    if (c_synth->parsed()) return cmd_synth(config_path, out_path, jobs);
    if (c_sim->parsed())
      return cmd_simulate(controller_path, runs, cycles, seed, csv_path, jobs);
    if (c_tube->parsed()) return cmd_tube(config_path, ball_arg, pattern_arg, csv_path);
    if (c_check->parsed()) return cmd_check(config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
