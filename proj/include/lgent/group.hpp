#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lgent/errors.hpp"

namespace lgent {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Coordinates of an element of the Lie algebra in the group's chart basis.
struct AlgebraVector {
  Vec coords;

  AlgebraVector() = default;
  explicit AlgebraVector(Vec c);

  int dim() const { return static_cast<int>(coords.size()); }
};

// Element of the group in its global chart.
struct GroupPoint {
  Vec coords;

  GroupPoint() = default;
  explicit GroupPoint(Vec c);

  int dim() const { return static_cast<int>(coords.size()); }
};

enum class GroupName {
  EuclideanD,   // (R^d, +)
  AffPlus,      // {(x, y) : x > 0}, (x1,y1)(x2,y2) = (x1 x2, x1 y2 + y1)
  Heisenberg3,  // R^3, (x1,x2,x3)(y1,y2,y3) = (x1+y1+x2 y3, x2+y2, x3+y3)
  Torus2,       // R^2 / Z^2, chart [0,1)^2
};

// One of the four built-in Lie groups: arithmetic, exp/log charts, a
// left-invariant distance and the structure constants of its algebra.
// Immutable after construction; all member functions are pure.
class GroupSpec {
 public:
  static GroupSpec euclidean(int d);
  static GroupSpec aff_plus();
  static GroupSpec heisenberg3();
  static GroupSpec torus2();

  // Parses "euclidean:d", "aff_plus", "heisenberg3", "torus2".
  static GroupSpec from_name(const std::string& name);

  GroupName name() const { return name_; }
  const std::string& name_string() const { return name_string_; }
  int dimension() const { return dim_; }
  bool simply_connected() const { return simply_connected_; }

  GroupPoint identity() const;

  // Wraps (torus) and validates chart constraints; ChartViolation otherwise.
  GroupPoint make_point(Vec coords) const;
  void validate(const GroupPoint& p) const;

  GroupPoint product(const GroupPoint& a, const GroupPoint& b) const;
  GroupPoint inverse(const GroupPoint& a) const;

  GroupPoint exp_map(const AlgebraVector& x) const;
  AlgebraVector log_map(const GroupPoint& g) const;

  double distance(const GroupPoint& a, const GroupPoint& b) const;

  // Alternative left-invariant distance surrogate (norm of log(a^-1 b)); used
  // only by the metric-independence smoke test.
  double distance_logchart(const GroupPoint& a, const GroupPoint& b) const;

  // c[i][j][k]: [e_i, e_j] = sum_k c[i][j][k] e_k in the chart basis at e.
  const std::vector<Mat>& structure_constants() const { return struct_consts_; }

  // Matrix of ad(X) in the chart basis, built from the structure constants.
  Mat ad(const AlgebraVector& x) const;

  // Difference of chart coordinates, shortest representative on the torus.
  Vec chart_delta(const GroupPoint& a, const GroupPoint& b) const;

  // log(a^-1 b) computed from coordinate differences, so coincident points
  // give exactly zero (the gauge's fourth root would otherwise amplify
  // cancellation noise).
  Vec log_difference(const GroupPoint& a, const GroupPoint& b) const;

 private:
  GroupSpec(GroupName name, int dim, bool simply_connected, std::string str);

  GroupName name_;
  int dim_;
  bool simply_connected_;
  std::string name_string_;
  std::vector<Mat> struct_consts_;  // struct_consts_[i](k, j) = c[i][j][k]
};

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|), with torus wrap. The scale-aware
// comparator used by trajectory-equality checks, where chart values can span
// many orders of magnitude.
double chart_distance(const GroupSpec& g, const GroupPoint& a,
                      const GroupPoint& b);

}  // namespace lgent
