#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "osl/constants.hpp"
#include "osl/geometry.hpp"
#include "osl/system.hpp"

namespace osl {

inline constexpr const char* kFileFormatVersion = "osl-synth/1";

// Any structural problem with a config or controller file; the message
// carries the offending field path (e.g. "modes[1].field[0]: ...").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string name;
  std::string notes;
  SwitchedSystem sys;
  Box R;
  Box S;
  std::optional<Box> R2;  // second zone: synthesis becomes R->R2 plus R2->R
  std::vector<int> grid;
  int max_pattern_length = 1;
  EstimatorConfig estimator;
  std::map<int, ConstantsOverride> overrides;
};

// Parse + validate.  Field expressions are parsed against the declared
// dimension; affine tags are sample-checked against the expressions;
// R (and R2) must be contained in S.
ProblemConfig load_config(const std::string& path);
ProblemConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical serialized form: alphabetical keys, shortest round-trip numbers,
// expressions re-printed from their parsed form.  parse(canonical(c)) has
// canonical form identical to canonical(c).
std::string canonical_config_text(const ProblemConfig& c);

// FNV-1a 64 over the canonical form, as 16 hex digits.
std::string config_hash(const ProblemConfig& c);

struct ControllerArtifact {
  ProblemConfig config;
  std::string hash;  // config_hash of `config`
  ConstantsTable constants;
  std::vector<Controller> controllers;  // one, or two for two-zone problems
};

void write_controller_file(const std::string& path, const ControllerArtifact& a);
ControllerArtifact read_controller_file(const std::string& path);

// Standalone constants report (the `constants` subcommand output).
void write_constants_report(const std::string& path, const ProblemConfig& c,
                            const ConstantsTable& t);

std::string constants_source_name(ConstantsSource s);
std::string controller_status_name(ControllerStatus s);

}  // namespace osl
