#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "lgent/entropy.hpp"
#include "lgent/quotient.hpp"
#include "lgent/scenario.hpp"
#include "lgent/spectral.hpp"

namespace lgent {

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct RunReport {
  std::string name;
  std::string preset;
  std::string version;
  unsigned long long config_hash = 0;
  std::string canonical_config;
  double delta = 0.0;
  double rho = 0.0;

  // spectral summary
  Mat differential;
  std::vector<std::complex<double>> eigenvalues;
  int dim_plus = 0, dim_zero = 0, dim_minus = 0;
  double bowen_bits = 0.0;
  double bowen_nats = 0.0;
  bool log_base_note = true;  // both bases reported; see summary text
  GrowthBounds growth;
  BracketClosureReport bracket;
  TraceAdReport trace_ad;
  ClosednessMetadata closedness;

  // quotient stage
  bool quotient_enabled = false;
  std::string quotient_note;
  std::optional<MeasureBound> measure_bound;

  // admissibility + entropy stage
  bool certified = false;
  long long certificate_evaluations = 0;
  size_t grid_points = 0;
  SweepTable sweep;                           // estimator = rinv
  std::vector<SweepCell> separated_cells;     // estimator = separated (r_inv column holds s_n)
  std::optional<EntropyFit> separated_fit;
  long long separated_spanning_failures = 0;
  double estimate_slope = 0.0;  // headline estimate in the scenario's base

  std::optional<DensityWitnessReport> witness;

  TheoremVerdict verdict;
  std::vector<StageTiming> timings;
};

RunReport run_scenario(const Scenario& s);

struct EmitOptions {
  bool include_timings = false;  // timings break byte-determinism; off by default
};

// Writes summary.txt, the (n, eps) table, fit table and plot-ready files into
// out_dir. Identical (scenario, seed) runs produce byte-identical files.
std::vector<std::string> emit_report(const RunReport& r, const std::string& out_dir,
                                     const EmitOptions& opts = {});

}  // namespace lgent
