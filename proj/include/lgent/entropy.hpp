#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lgent/neighborhood.hpp"
#include "lgent/system.hpp"

namespace lgent {

// Compact K sampled on a rho-grid, target set Q as a chart box, and the
// default inflation radius for N_eps(Q) under the group distance.
struct AdmissiblePair {
  Box k_box;
  Box q_box;
  double eps = 0.0;
  double rho = 0.0;
  std::vector<GroupPoint> k_grid;

  // Checks K_grid subset of Q and the safety margin rho <= eps / 4.
  static AdmissiblePair build(const GroupSpec& g, Box k_box, Box q_box,
                              double eps, double rho);

  // K sampled along a segment through e instead of a box grid; used by the
  // separated-set estimator on the torus, where the grid spacing must resolve
  // eps * sigma^n_max along the expanding direction.
  static AdmissiblePair build_segment(const GroupSpec& g, const Vec& direction,
                                      double length, double spacing, Box q_box,
                                      double eps);
};

struct AdmissibilityCertificate {
  int horizon = 0;
  std::vector<ControlWord> words;  // per grid point; empty when uncovered
  std::vector<int> uncovered;
  long long evaluations = 0;  // (word, point) trajectory equivalents

  bool complete() const { return uncovered.empty(); }
};

// Depth-first search for a word of length `horizon` keeping each K-grid
// point inside Q, with fail-memoization on a Q-discretization of the state
// space (cell size memo_cell; 0 picks rho / 2).
AdmissibilityCertificate certify_admissible(const LinearSystem& sys,
                                            const AdmissiblePair& pair,
                                            int horizon, double memo_cell = 0.0,
                                            long long budget = 10000000);

// Throws NotAdmissibleAtResolution when the certificate is incomplete (which
// distinguishes "no word over this alphabet/resolution" from a proof of
// inadmissibility).
void require_certificate(const AdmissibilityCertificate& cert);

enum class CoverMethod { greedy, exact };

struct SpanningResult {
  int n = 0;
  double eps = 0.0;
  CoverMethod method = CoverMethod::greedy;
  long long r_inv = 0;
  std::vector<std::pair<ControlWord, std::vector<int>>> cover;
  long long evaluations = 0;
};

// Minimal-cardinality spanning estimate at horizon n into N_eps(Q).
// greedy: set cover with lazily generated candidate words (a word is pruned
// at the first step that leaves N_eps(Q) for every still-uncovered point it
// might serve). exact: exhaustive alive-prefix enumeration, dominance
// filtering, then certified branch-and-bound. Budget counts (word, point)
// trajectory evaluations; exceeding it throws, never truncates.
SpanningResult r_inv_estimate(const LinearSystem& sys,
                              const AdmissiblePair& pair,
                              const AdmissibilityCertificate& cert, int n,
                              double eps, CoverMethod method,
                              long long budget = 10000000);

// Bit-exact replay of a cover against the definition. Returns false if any
// covered point leaves N_eps(Q) at some step 1..n or any grid point is
// uncovered.
bool verify_spanning(const LinearSystem& sys, const AdmissiblePair& pair,
                     const SpanningResult& result);

struct EntropyFit {
  double slope = 0.0;       // per-step growth of log r
  double stderr_slope = 0.0;
  double ci95 = 0.0;
  double limsup_surrogate = 0.0;  // max over n of log(r) / n
  int points = 0;
};

// Least-squares slope of log_base(r) against n.
EntropyFit h_inv_estimate(const std::vector<std::pair<int, long long>>& r_by_n,
                          double log_base = 2.0);

struct SweepCell {
  double eps = 0.0;
  int n = 0;
  long long r_inv = 0;
  CoverMethod method = CoverMethod::greedy;
  long long evaluations = 0;
  double wall_ms = 0.0;
};

struct SweepTable {
  std::vector<SweepCell> cells;
  std::vector<std::pair<double, EntropyFit>> fits;  // one per eps
  double sup_slope = 0.0;  // outer-entropy surrogate: sup over eps
};

// h_inv estimate per eps over a strictly decreasing eps list. The
// certificate must cover horizon n_max (greedy mode replays it as the
// fallback word).
SweepTable outer_entropy_sweep(const LinearSystem& sys,
                               const AdmissiblePair& pair,
                               const AdmissibilityCertificate& cert,
                               const std::vector<double>& eps_list, int n_min,
                               int n_max, CoverMethod method,
                               long long budget = 10000000,
                               double log_base = 2.0);

struct SeparatedResult {
  int n = 0;
  double eps = 0.0;
  long long s_n = 0;
  std::vector<int> selected;  // indices into the candidate grid
};

// Greedy maximal (n, eps)-separated subset of the grid under iterates of the
// uncontrolled automorphism.
SeparatedResult separated_set(const LinearSystem& sys,
                              const std::vector<GroupPoint>& grid, int n,
                              double eps);

// Number of grid points with no selected point eps-close at every step
// 0..n. Zero confirms that the maximal separated set is (n, eps)-spanning.
long long count_spanning_failures(const LinearSystem& sys,
                                  const std::vector<GroupPoint>& grid,
                                  const SeparatedResult& separated);

struct TheoremVerdict {
  double estimate = 0.0;
  double upper = 0.0;
  std::optional<double> lower;
  double upper_margin = 0.0;  // upper + tol - estimate (>= 0 passes)
  double lower_margin = 0.0;  // estimate - lower + tol (>= 0 passes)
  bool upper_ok = false;
  bool lower_ok = true;
  bool lower_gated = false;
  bool pointwise_ok = true;
  bool pass = false;
  std::string detail;
};

struct TheoremInputs {
  double estimate_slope = 0.0;
  double bowen_upper = 0.0;
  std::optional<double> lower_slope;
  double upper_tol = 0.2;
  double lower_tol = 0.2;
  bool gate_lower = true;
  // (log bound value, log r_inv) pairs in the same base; bound <= r_inv must
  // hold pointwise when the quotient bound applies.
  std::vector<std::pair<double, double>> pointwise_log;
};

TheoremVerdict theorem_check(const TheoremInputs& in);

}  // namespace lgent
