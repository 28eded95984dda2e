#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lgent/spectral.hpp"
#include "lgent/system.hpp"

namespace lgent {

// Concrete chart for G / G^-: linear coordinate projection after a change of
// basis to [stable | center-unstable] in the global chart. Valid for the
// built-ins, whose exp-coordinates are global; requires G^- closed.
class QuotientChart {
 public:
  static QuotientChart build(const GroupSpec& g, const SubalgebraSplit& split,
                             const ClosednessMetadata& meta);

  const GroupSpec& group() const { return group_; }
  int stable_dim() const { return stable_dim_; }
  int quotient_dim() const { return group_.dimension() - stable_dim_; }

  // Coordinates of gG^- in the center-unstable basis.
  Vec project(const GroupPoint& g) const;

  // Canonical lift with vanishing stable part.
  GroupPoint lift(const Vec& q) const;

  // Left translation L_g on quotient coordinates, and |det| of its Jacobian
  // at the given point (used by the invariance checks and the pullback
  // quadrature).
  Vec left_translate(const GroupPoint& g, const Vec& q) const;
  double left_translate_jacobian(const GroupPoint& g, const Vec& q) const;

  const Mat& basis() const { return basis_; }  // [stable | complement]

 private:
  GroupSpec group_ = GroupSpec::euclidean(1);
  Mat basis_;
  Mat basis_inverse_;
  int stable_dim_ = 0;
};

// G-invariant volume on the quotient chart, as a density against Lebesgue in
// quotient coordinates. Unique up to scale; the scale cancels in the bound.
struct InvariantMeasure {
  std::string name;
  std::function<double(const Vec&)> density;
};

InvariantMeasure make_invariant_measure(const QuotientChart& chart);

// Pointwise left-invariance defect of the measure: the change-of-variables
// identity rho(L_g x) |det dL_g| = rho(x), evaluated on sample points. This is
// the computable content of vol(L_g A) = vol(A).
double measure_invariance_defect(const QuotientChart& chart,
                                 const InvariantMeasure& mu,
                                 const GroupPoint& g,
                                 const std::vector<Vec>& samples);

// Induced system on the quotient: one step, and the stepwise-projected
// trajectory (re-lifting after every step, so the path is independent of the
// chosen lift exactly when the projection is well defined).
Vec induced_step(const QuotientChart& chart, const LinearSystem& sys,
                 const Vec& q, int letter);
std::vector<Vec> induced_trajectory(const QuotientChart& chart,
                                    const LinearSystem& sys, int k,
                                    const Vec& q, const ControlWord& w);

// (d fbar_0^k)_{eH} restricted to the center-unstable complement, in the
// complement basis. Throws InvarianceViolated if the complement is not
// invariant under the differential.
Mat quotient_differential(const QuotientChart& chart, const Mat& d, int k);

struct VolumeEstimate {
  double box_counting = 0.0;
  double monte_carlo = 0.0;
  long long cells = 0;
};

// Volume of {q : member(q)} inside bounding_box against the measure density,
// by deterministic box counting at `resolution` with a fixed-seed Monte Carlo
// cross-check.
VolumeEstimate estimate_volume(const InvariantMeasure& mu,
                               const Box& bounding_box, double resolution,
                               const std::function<bool(const Vec&)>& member,
                               unsigned long long seed, int mc_samples = 100000);

struct MeasureBound {
  double mu_k = 0.0;
  double mu_q_eps = 0.0;
  double det_complement = 0.0;  // |det (df0)_e restricted to g^{+,0}|
  double slope = 0.0;           // log_base |det|, exact formula property
  double value_at(int n) const {
    return mu_k / mu_q_eps * std::pow(det_complement, n);
  }
  double log_value_at(int n, double log_base) const {
    return (std::log(mu_k / mu_q_eps) + n * std::log(det_complement)) /
           std::log(log_base);
  }
};

// mu(pi K) / mu(N_eps(pi Q)) * |det|^n lower bound data for r_inv, with
// |det| taken from the quotient differential of d. K and Q are chart boxes.
MeasureBound measure_lower_bound(const QuotientChart& chart,
                                 const InvariantMeasure& mu, const Mat& d,
                                 const Box& k_box, const Box& q_box,
                                 double eps, double log_base,
                                 double resolution, unsigned long long seed);

}  // namespace lgent
