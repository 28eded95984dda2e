#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgent/group.hpp"
#include "lgent/region.hpp"

namespace lgent {

// Finite control alphabet: the delta-grid of a box containing 0. The grid is
// anchored at 0 in every coordinate, so 0 is always a letter even when the
// box is asymmetric.
class ControlRange {
 public:
  ControlRange() = default;
  ControlRange(Box box, double delta);

  int ambient_dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  double delta() const { return delta_; }

  const std::vector<Vec>& alphabet() const { return alphabet_; }
  int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
  const Vec& letter(int i) const { return alphabet_.at(i); }
  int zero_index() const { return zero_index_; }

  void require_in_box(const Vec& u) const;

 private:
  Box box_;
  double delta_ = 1.0;
  std::vector<Vec> alphabet_;  // sorted lexicographically by coordinates
  int zero_index_ = 0;
};

// Word over the alphabet, stored as letter indices.
struct ControlWord {
  std::vector<int> letters;

  int length() const { return static_cast<int>(letters.size()); }
};

// Drops the first k letters (the k-shift).
ControlWord shift(const ControlWord& w, int k);

// Discrete-time linear control system g_{k+1} = f(g_k, u_k) on a GroupSpec,
// with f_u(g) = b(u) * f0(g). f0 and b are closed-form per scenario.
class LinearSystem {
 public:
  LinearSystem(GroupSpec group, ControlRange control, std::string name,
               std::function<GroupPoint(const GroupPoint&)> f0,
               std::function<GroupPoint(const Vec&)> translation,
               std::optional<Mat> analytic_differential);

  const GroupSpec& group() const { return group_; }
  const ControlRange& control() const { return control_; }
  const std::string& name() const { return name_; }
  const std::optional<Mat>& analytic_differential() const {
    return analytic_differential_;
  }

  GroupPoint f0(const GroupPoint& g) const { return f0_(g); }
  GroupPoint f0_pow(const GroupPoint& g, int k) const;
  GroupPoint translation(const Vec& u) const { return translation_(u); }

  // One step with an arbitrary control in the box (not necessarily a letter).
  GroupPoint step(const GroupPoint& g, const Vec& u) const;
  GroupPoint step(const GroupPoint& g, double u_scalar) const;
  GroupPoint step_letter(const GroupPoint& g, int letter) const;

  // k+1 points starting at g, iterating f_{u_j}.
  std::vector<GroupPoint> trajectory_direct(int k, const GroupPoint& g,
                                            const ControlWord& w) const;

  // Same contract, via the solution formula: phi(j,e,w) * f0^j(g).
  std::vector<GroupPoint> trajectory_translated(int k, const GroupPoint& g,
                                                const ControlWord& w) const;

 private:
  GroupSpec group_;
  ControlRange control_;
  std::string name_;
  std::function<GroupPoint(const GroupPoint&)> f0_;
  std::function<GroupPoint(const Vec&)> translation_;
  std::optional<Mat> analytic_differential_;
};

// The four named systems plus inline Euclidean systems x' = Ax + Bu.
LinearSystem make_euclidean_system(const Mat& a, const Mat& b, Box control_box,
                                   double delta);
LinearSystem make_aff_system(Box control_box, double delta);
LinearSystem make_heisenberg_system(Box control_box, double delta);
LinearSystem make_torus_cat_system();

}  // namespace lgent
