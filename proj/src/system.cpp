#include "lgent/system.hpp"

#include <cmath>

namespace lgent {

ControlRange::ControlRange(Box box, double delta)
    : box_(std::move(box)), delta_(delta) {
  if (!(delta_ > 0.0)) throw ConfigError("control delta must be positive");
  const int m = box_.dim();
  for (int i = 0; i < m; ++i) {
    if (box_.lo(i) > 0.0 || box_.hi(i) < 0.0) {
      throw ConfigError("control box must contain 0");
    }
  }
  // Per-axis grid k*delta anchored at 0, intersected with the box.
  std::vector<std::vector<double>> axes(m);
  for (int i = 0; i < m; ++i) {
    const long kmin = static_cast<long>(std::ceil(box_.lo(i) / delta_ - 1e-12));
    const long kmax = static_cast<long>(std::floor(box_.hi(i) / delta_ + 1e-12));
    for (long k = kmin; k <= kmax; ++k) axes[i].push_back(k * delta_);
  }
  std::vector<int> idx(m, 0);
  while (true) {
    Vec u(m);
    for (int i = 0; i < m; ++i) u(i) = axes[i][idx[i]];
    alphabet_.push_back(std::move(u));
    int axis = m - 1;
    while (axis >= 0) {
      if (++idx[axis] < static_cast<int>(axes[axis].size())) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  zero_index_ = -1;
  for (int i = 0; i < static_cast<int>(alphabet_.size()); ++i) {
    if (alphabet_[i].lpNorm<Eigen::Infinity>() == 0.0) {
      zero_index_ = i;
      break;
    }
  }
  if (zero_index_ < 0) throw ConfigError("control alphabet lost letter 0");
}

void ControlRange::require_in_box(const Vec& u) const {
  if (u.size() != box_.dim()) {
    throw ControlOutOfRange("control dimension mismatch");
  }
  if (!box_.contains(u, 1e-12)) {
    throw ControlOutOfRange("control outside the admissible box");
  }
}

ControlWord shift(const ControlWord& w, int k) {
  if (k < 0 || k > w.length()) throw WordTooShort("shift amount exceeds word");
  ControlWord out;
  out.letters.assign(w.letters.begin() + k, w.letters.end());
  return out;
}

LinearSystem::LinearSystem(GroupSpec group, ControlRange control,
                           std::string name,
                           std::function<GroupPoint(const GroupPoint&)> f0,
                           std::function<GroupPoint(const Vec&)> translation,
                           std::optional<Mat> analytic_differential)
    : group_(std::move(group)),
      control_(std::move(control)),
      name_(std::move(name)),
      f0_(std::move(f0)),
      translation_(std::move(translation)),
      analytic_differential_(std::move(analytic_differential)) {}

GroupPoint LinearSystem::f0_pow(const GroupPoint& g, int k) const {
  GroupPoint p = g;
  for (int i = 0; i < k; ++i) p = f0_(p);
  return p;
}

GroupPoint LinearSystem::step(const GroupPoint& g, const Vec& u) const {
  control_.require_in_box(u);
  return group_.product(translation_(u), f0_(g));
}

GroupPoint LinearSystem::step(const GroupPoint& g, double u_scalar) const {
  Vec u(1);
  u(0) = u_scalar;
  return step(g, u);
}

GroupPoint LinearSystem::step_letter(const GroupPoint& g, int letter) const {
  return group_.product(translation_(control_.letter(letter)), f0_(g));
}

std::vector<GroupPoint> LinearSystem::trajectory_direct(
    int k, const GroupPoint& g, const ControlWord& w) const {
  if (k > w.length()) throw WordTooShort("horizon exceeds word length");
  std::vector<GroupPoint> out;
  out.reserve(k + 1);
  out.push_back(g);
  for (int j = 0; j < k; ++j) out.push_back(step_letter(out.back(), w.letters[j]));
  return out;
}

std::vector<GroupPoint> LinearSystem::trajectory_translated(
    int k, const GroupPoint& g, const ControlWord& w) const {
  if (k > w.length()) throw WordTooShort("horizon exceeds word length");
  std::vector<GroupPoint> out;
  out.reserve(k + 1);
  GroupPoint at_e = group_.identity();
  GroupPoint f0k_g = g;
  out.push_back(g);
  for (int j = 0; j < k; ++j) {
    at_e = step_letter(at_e, w.letters[j]);
    f0k_g = f0_(f0k_g);
    out.push_back(group_.product(at_e, f0k_g));
  }
  return out;
}

LinearSystem make_euclidean_system(const Mat& a, const Mat& b, Box control_box,
                                   double delta) {
  const int d = static_cast<int>(a.rows());
  if (a.cols() != d) throw ConfigError("A must be square");
  if (b.rows() != d) throw ConfigError("B row count must match A");
  if (b.cols() != control_box.dim()) {
    throw ConfigError("B column count must match the control box dimension");
  }
  GroupSpec g = GroupSpec::euclidean(d);
  return LinearSystem(
      g, ControlRange(std::move(control_box), delta), "euclid_ab",
      [a](const GroupPoint& p) { return GroupPoint(a * p.coords); },
      [b](const Vec& u) { return GroupPoint(b * u); }, a);
}

LinearSystem make_aff_system(Box control_box, double delta) {
  if (control_box.dim() != 1) throw ConfigError("aff system is single-input");
  GroupSpec g = GroupSpec::aff_plus();
  Mat d0(2, 2);
  d0 << 1.0, 0.0, 0.0, std::exp(2.0);
  return LinearSystem(
      g, ControlRange(std::move(control_box), delta), "aff_example",
      [g](const GroupPoint& p) {
        Vec r(2);
        r(0) = p.coords(0);
        r(1) = p.coords(1) * std::exp(2.0);
        return g.make_point(std::move(r));
      },
      [g](const Vec& u) {
        Vec r(2);
        r(0) = std::exp(u(0));
        r(1) = u(0);
        return g.make_point(std::move(r));
      },
      d0);
}

LinearSystem make_heisenberg_system(Box control_box, double delta) {
  if (control_box.dim() != 1) throw ConfigError("heisenberg system is single-input");
  GroupSpec g = GroupSpec::heisenberg3();
  Mat d0(3, 3);
  d0 << 1.0, 1.0, 0.0,
        0.0, 1.0, 0.0,
        0.0, 1.0, 1.0;
  return LinearSystem(
      g, ControlRange(std::move(control_box), delta), "heisenberg_example",
      [](const GroupPoint& p) {
        Vec r(3);
        r(0) = p.coords(0) + p.coords(1) + p.coords(1) * p.coords(1) / 2.0;
        r(1) = p.coords(1);
        r(2) = p.coords(1) + p.coords(2);
        return GroupPoint(std::move(r));
      },
      [](const Vec& u) {
        const double v = u(0);
        Vec r(3);
        r(0) = -v / 2.0 - v * v / 3.0;
        r(1) = v;
        r(2) = -v / 2.0;
        return GroupPoint(std::move(r));
      },
      d0);
}

LinearSystem make_torus_cat_system() {
  GroupSpec g = GroupSpec::torus2();
  Vec zero = Vec::Zero(1);
  Mat d0(2, 2);
  d0 << 2.0, 1.0, 1.0, 1.0;
  return LinearSystem(
      g, ControlRange(Box(zero, zero), 1.0), "torus_cat",
      [g, d0](const GroupPoint& p) { return g.make_point(d0 * p.coords); },
      [g](const Vec&) { return g.identity(); }, d0);
}

}  // namespace lgent
