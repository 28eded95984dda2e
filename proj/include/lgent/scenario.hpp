#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgent/entropy.hpp"
#include "lgent/region.hpp"
#include "lgent/system.hpp"

namespace lgent {

// Admissible-pair description as written in scenario files. Box pairs are
// the common case; the torus separated-set estimator samples K along a
// segment through e instead.
struct PairSpec {
  Box k_box;
  Box q_box;
  int horizon = 12;
  std::optional<Vec> segment_direction;
  double segment_length = 1.0;
};

// A full experiment description: system, admissible pair, sweep grid and
// estimator knobs. Built from a preset and optionally overridden by a flat
// key = value scenario file (one nesting level: pair.*).
struct Scenario {
  std::string name = "scenario";
  std::string preset;             // empty for inline Euclidean definitions
  std::optional<Mat> inline_a;    // x' = Ax + Bu when preset is empty
  std::optional<Mat> inline_b;
  Box control_box;
  double delta = 1.0;
  PairSpec pair;
  std::vector<double> eps_list;
  int n_min = 2;
  int n_max = 8;
  double rho = 0.05;
  CoverMethod mode = CoverMethod::greedy;
  double log_base = 2.0;
  unsigned long long seed = 1;
  long long budget = 10000000;
  std::string estimator = "rinv";  // rinv | separated
  double upper_tol = 0.2;          // theorem gates, in log_base units
  double lower_tol = 0.2;
  bool check_lower = true;
  double witness_eps = 0.05;
  double witness_tmax = 10000.0;
  int witness_grid = 20;
};

// Named presets reproducing the built-in experiments.
std::vector<std::string> preset_names();
Scenario make_preset_scenario(const std::string& name);

// Canonical key = value dump; reparsing it reproduces the scenario. Also the
// byte string hashed into the report provenance.
std::string canonical_dump(const Scenario& s);

// Parses scenario text. Unknown keys, malformed values and violated
// invariants (rho > eps/4, empty n range, 0 outside the control box, ...)
// raise ConfigError with the offending line.
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

void validate_scenario(const Scenario& s);

// System construction from the scenario's preset or inline matrices.
LinearSystem make_system(const Scenario& s);

}  // namespace lgent
