#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "lgent/system.hpp"

namespace lgent {

// (df0)_e in the group's chart basis.
struct Differential {
  Mat d;
};

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;  // with multiplicity
};

// Real basis of the generalized eigenspace of one eigenvalue cluster
// (conjugate pairs are merged; the basis spans the real form of both).
struct EigenspaceComponent {
  std::complex<double> eigenvalue;  // representative, Im >= 0
  int multiplicity;                 // algebraic, counting the conjugate
  Mat basis;                        // d x multiplicity, orthonormal columns
};

struct SubalgebraSplit {
  Mat basis_plus;   // d x dim(g+), |alpha| > 1
  Mat basis_zero;   // d x dim(g0), |alpha| = 1
  Mat basis_minus;  // d x dim(g-), |alpha| < 1
  double eta = 1e-9;
  std::vector<EigenspaceComponent> components;

  int dim_plus() const { return static_cast<int>(basis_plus.cols()); }
  int dim_zero() const { return static_cast<int>(basis_zero.cols()); }
  int dim_minus() const { return static_cast<int>(basis_minus.cols()); }
};

// Constants (c, sigma) for the expansion/contraction bounds on g+ / g-:
// |D^n X| >= c sigma^-n |X| on g+ and |D^n Y| <= c^-1 sigma^n |Y| on g-.
struct GrowthBounds {
  bool nontrivial = false;  // false when g+ and g- are both {0}
  double c = 1.0;
  double sigma = 0.0;
  int horizon = 0;
};

struct BracketCheckEntry {
  std::complex<double> alpha, beta, product;
  bool product_is_eigenvalue = false;
  double residual = 0.0;
};

struct BracketClosureReport {
  std::vector<BracketCheckEntry> entries;
  double worst_residual = 0.0;
  bool pass = true;
};

struct TraceAdReport {
  int vectors_checked = 0;
  double worst_trace = 0.0;
  double worst_nilpotency = 0.0;
  bool pass = true;  // vacuously true when g+ and g- are both {0}
};

struct ClosednessMetadata {
  bool stable_closed = true;
  bool unstable_closed = true;
  std::string reason;
};

struct DensityWitnessReport {
  int grid_per_side = 0;
  double eps = 0.0;
  double t_max = 0.0;
  std::vector<double> hit_times;  // -1 when not reached
  std::vector<int> missed;        // target indices without a hit
  bool complete() const { return missed.empty(); }
};

// Analytic differential when the system defines one, finite differences
// otherwise; cross-checked against each other when both exist.
Differential differential_at_identity(const LinearSystem& sys);

// Central finite-difference Jacobian of X -> log(f0^n(exp X)) at 0.
Mat fd_differential(const LinearSystem& sys, int n_iterations = 1);

Spectrum eigen_spectrum(const Mat& d);

SubalgebraSplit split_subalgebras(const Mat& d, double eta = 1e-9);

// Sum of log|lambda| over |lambda| > 1 in the requested base (2.0, e, ...).
double bowen_entropy(const Spectrum& s, double log_base);

GrowthBounds growth_constants(const Mat& d, const SubalgebraSplit& split,
                              int horizon = 30);

BracketClosureReport bracket_closure_check(const GroupSpec& g,
                                           const SubalgebraSplit& split);

TraceAdReport trace_ad_check(const GroupSpec& g, const SubalgebraSplit& split);

ClosednessMetadata closedness_metadata(const GroupSpec& g,
                                       const SubalgebraSplit& split);

// Marches the line flow t * direction mod Z^2 and records, for every point of
// a grid_per_side^2 target grid, the first time it comes within eps.
DensityWitnessReport density_witness_torus(const Vec& direction, double eps,
                                           double t_max,
                                           int grid_per_side = 20);

// Throws WitnessNotFound when the report is incomplete.
void require_witness(const DensityWitnessReport& report);

}  // namespace lgent
