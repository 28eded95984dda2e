#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lgent/errors.hpp"

namespace lgent {

// Axis-aligned box in chart coordinates. The set descriptor used for K, Q
// and control ranges.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd l, Eigen::VectorXd h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw ConfigError("box lo/hi dimension mismatch");
    for (int i = 0; i < lo.size(); ++i) {
      if (!(lo(i) <= hi(i))) throw ConfigError("box has lo > hi");
    }
  }

  // Flat [lo1, hi1, lo2, hi2, ...] as written in scenario files.
  static Box from_flat(const std::vector<double>& v) {
    if (v.empty() || v.size() % 2 != 0) {
      throw ConfigError("box literal needs an even number of entries");
    }
    int d = static_cast<int>(v.size() / 2);
    Eigen::VectorXd lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo(i) = v[2 * i];
      hi(i) = v[2 * i + 1];
    }
    return Box(std::move(lo), std::move(hi));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Eigen::VectorXd& p, double slack = 0.0) const {
    for (int i = 0; i < lo.size(); ++i) {
      if (p(i) < lo(i) - slack || p(i) > hi(i) + slack) return false;
    }
    return true;
  }

  // Euclidean distance from p to the box in chart coordinates.
  double chart_distance_to(const Eigen::VectorXd& p) const {
    double s = 0.0;
    for (int i = 0; i < lo.size(); ++i) {
      double d = 0.0;
      if (p(i) < lo(i)) d = lo(i) - p(i);
      else if (p(i) > hi(i)) d = p(i) - hi(i);
      s += d * d;
    }
    return std::sqrt(s);
  }

  // Nearest point of the box in chart coordinates.
  Eigen::VectorXd clamp(const Eigen::VectorXd& p) const {
    Eigen::VectorXd q = p;
    for (int i = 0; i < lo.size(); ++i) {
      q(i) = std::min(std::max(q(i), lo(i)), hi(i));
    }
    return q;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.size(); ++i) v *= hi(i) - lo(i);
    return v;
  }

  // Grid of points at spacing rho (includes both faces; a degenerate axis
  // contributes the single coordinate).
  std::vector<Eigen::VectorXd> grid(double rho) const;
};

}  // namespace lgent
