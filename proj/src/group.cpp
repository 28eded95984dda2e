#include "lgent/group.hpp"

#include <cmath>

namespace lgent {

namespace {

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw ChartViolation(std::string(what) + ": non-finite coordinates");
  }
}

// (e^a - 1) / a, stable near a = 0.
double expm1_over(double a) {
  if (std::abs(a) < 1e-8) return 1.0 + a / 2.0 + a * a / 6.0;
  return std::expm1(a) / a;
}

double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;  // guard against floor rounding at negative ulps
  return y;
}

// Shortest representative of x mod 1 in [-1/2, 1/2).
double wrap_centered(double x) {
  double y = wrap01(x);
  return (y >= 0.5) ? y - 1.0 : y;
}

}  // namespace

AlgebraVector::AlgebraVector(Vec c) : coords(std::move(c)) {
  check_finite(coords, "AlgebraVector");
}

GroupPoint::GroupPoint(Vec c) : coords(std::move(c)) {
  check_finite(coords, "GroupPoint");
}

GroupSpec::GroupSpec(GroupName name, int dim, bool simply_connected,
                     std::string str)
    : name_(name),
      dim_(dim),
      simply_connected_(simply_connected),
      name_string_(std::move(str)) {
  struct_consts_.assign(dim_, Mat::Zero(dim_, dim_));
  switch (name_) {
    case GroupName::AffPlus:
      // [e1, e2] = e2
      struct_consts_[0](1, 1) = 1.0;   // c[0][1][1] = 1
      struct_consts_[1](1, 0) = -1.0;  // c[1][0][1] = -1
      break;
    case GroupName::Heisenberg3:
      // [e2, e3] = e1
      struct_consts_[1](0, 2) = 1.0;   // c[1][2][0] = 1
      struct_consts_[2](0, 1) = -1.0;  // c[2][1][0] = -1
      break;
    default:
      break;  // abelian
  }
}

GroupSpec GroupSpec::euclidean(int d) {
  if (d < 1) throw ConfigError("euclidean dimension must be >= 1");
  return GroupSpec(GroupName::EuclideanD, d, true,
                   "euclidean:" + std::to_string(d));
}

GroupSpec GroupSpec::aff_plus() {
  return GroupSpec(GroupName::AffPlus, 2, true, "aff_plus");
}

GroupSpec GroupSpec::heisenberg3() {
  return GroupSpec(GroupName::Heisenberg3, 3, true, "heisenberg3");
}

GroupSpec GroupSpec::torus2() {
  return GroupSpec(GroupName::Torus2, 2, false, "torus2");
}

GroupSpec GroupSpec::from_name(const std::string& name) {
  if (name.rfind("euclidean:", 0) == 0) {
    int d = 0;
    try {
      d = std::stoi(name.substr(10));
    } catch (const std::exception&) {
      throw ConfigError("bad euclidean dimension in group name '" + name + "'");
    }
    return euclidean(d);
  }
  if (name == "aff_plus") return aff_plus();
  if (name == "heisenberg3") return heisenberg3();
  if (name == "torus2") return torus2();
  throw ConfigError("unknown group '" + name + "'");
}

GroupPoint GroupSpec::identity() const {
  Vec e = Vec::Zero(dim_);
  if (name_ == GroupName::AffPlus) e(0) = 1.0;
  return GroupPoint(e);
}

GroupPoint GroupSpec::make_point(Vec coords) const {
  check_finite(coords, "GroupPoint");
  if (static_cast<int>(coords.size()) != dim_) {
    throw ChartViolation("point dimension " + std::to_string(coords.size()) +
                         " != group dimension " + std::to_string(dim_));
  }
  if (name_ == GroupName::Torus2) {
    for (int i = 0; i < dim_; ++i) coords(i) = wrap01(coords(i));
  }
  GroupPoint p(std::move(coords));
  validate(p);
  return p;
}

void GroupSpec::validate(const GroupPoint& p) const {
  if (p.dim() != dim_) {
    throw ChartViolation("point dimension mismatch for " + name_string_);
  }
  check_finite(p.coords, "GroupPoint");
  switch (name_) {
    case GroupName::AffPlus:
      if (!(p.coords(0) > 0.0)) {
        throw ChartViolation("aff_plus requires first coordinate > 0, got " +
                             std::to_string(p.coords(0)));
      }
      break;
    case GroupName::Torus2:
      for (int i = 0; i < dim_; ++i) {
        if (p.coords(i) < 0.0 || p.coords(i) >= 1.0) {
          throw ChartViolation("torus2 coordinates must lie in [0,1)");
        }
      }
      break;
    default:
      break;
  }
}

GroupPoint GroupSpec::product(const GroupPoint& a, const GroupPoint& b) const {
  validate(a);
  validate(b);
  switch (name_) {
    case GroupName::EuclideanD:
      return GroupPoint(a.coords + b.coords);
    case GroupName::AffPlus: {
      Vec r(2);
      r(0) = a.coords(0) * b.coords(0);
      r(1) = a.coords(0) * b.coords(1) + a.coords(1);
      return make_point(std::move(r));
    }
    case GroupName::Heisenberg3: {
      Vec r(3);
      r(0) = a.coords(0) + b.coords(0) + a.coords(1) * b.coords(2);
      r(1) = a.coords(1) + b.coords(1);
      r(2) = a.coords(2) + b.coords(2);
      return GroupPoint(std::move(r));
    }
    case GroupName::Torus2:
      return make_point(a.coords + b.coords);
  }
  throw Error("unreachable");
}

GroupPoint GroupSpec::inverse(const GroupPoint& a) const {
  validate(a);
  switch (name_) {
    case GroupName::EuclideanD:
      return GroupPoint(-a.coords);
    case GroupName::AffPlus: {
      Vec r(2);
      r(0) = 1.0 / a.coords(0);
      r(1) = -a.coords(1) / a.coords(0);
      return make_point(std::move(r));
    }
    case GroupName::Heisenberg3: {
      Vec r(3);
      r(0) = -a.coords(0) + a.coords(1) * a.coords(2);
      r(1) = -a.coords(1);
      r(2) = -a.coords(2);
      return GroupPoint(std::move(r));
    }
    case GroupName::Torus2:
      return make_point(-a.coords);
  }
  throw Error("unreachable");
}

GroupPoint GroupSpec::exp_map(const AlgebraVector& x) const {
  if (x.dim() != dim_) throw ChartViolation("algebra vector dimension mismatch");
  check_finite(x.coords, "AlgebraVector");
  switch (name_) {
    case GroupName::EuclideanD:
      return GroupPoint(x.coords);
    case GroupName::AffPlus: {
      // exp(a E1 + b E2) = (e^a, b (e^a - 1)/a)
      Vec r(2);
      r(0) = std::exp(x.coords(0));
      r(1) = x.coords(1) * expm1_over(x.coords(0));
      return make_point(std::move(r));
    }
    case GroupName::Heisenberg3: {
      // BCH terminates at order 2: exp(a,b,c) = (a + bc/2, b, c).
      Vec r(3);
      r(0) = x.coords(0) + x.coords(1) * x.coords(2) / 2.0;
      r(1) = x.coords(1);
      r(2) = x.coords(2);
      return GroupPoint(std::move(r));
    }
    case GroupName::Torus2:
      return make_point(x.coords);
  }
  throw Error("unreachable");
}

AlgebraVector GroupSpec::log_map(const GroupPoint& g) const {
  validate(g);
  switch (name_) {
    case GroupName::EuclideanD:
      return AlgebraVector(g.coords);
    case GroupName::AffPlus: {
      Vec r(2);
      r(0) = std::log(g.coords(0));
      r(1) = g.coords(1) / expm1_over(r(0));
      return AlgebraVector(std::move(r));
    }
    case GroupName::Heisenberg3: {
      Vec r(3);
      r(0) = g.coords(0) - g.coords(1) * g.coords(2) / 2.0;
      r(1) = g.coords(1);
      r(2) = g.coords(2);
      return AlgebraVector(std::move(r));
    }
    case GroupName::Torus2: {
      // Canonical preimage in [-1/2, 1/2)^2; ambiguous on the cut locus.
      Vec r(2);
      for (int i = 0; i < 2; ++i) {
        double c = wrap_centered(g.coords(i));
        if (std::abs(std::abs(c) - 0.5) < 1e-12) {
          throw OutsideChart("torus2 log has no canonical preimage at |x|=1/2");
        }
        r(i) = c;
      }
      return AlgebraVector(std::move(r));
    }
  }
  throw Error("unreachable");
}

double GroupSpec::distance(const GroupPoint& a, const GroupPoint& b) const {
  validate(a);
  validate(b);
  switch (name_) {
    case GroupName::EuclideanD:
      return (a.coords - b.coords).norm();
    case GroupName::AffPlus: {
      // Closed form of the geodesic distance of the left-invariant metric
      // that is Euclidean at e in chart coordinates: identify (x, y) with the
      // point (y, x) of the hyperbolic upper half-plane; left translations
      // act as the isometries u -> au + b, v -> av.
      const double x1 = a.coords(0), y1 = a.coords(1);
      const double x2 = b.coords(0), y2 = b.coords(1);
      const double num = (y2 - y1) * (y2 - y1) + (x2 - x1) * (x2 - x1);
      return std::acosh(1.0 + num / (2.0 * x1 * x2));
    }
    case GroupName::Heisenberg3: {
      // Cygan gauge metric: d(a, b) = N(log(a^-1 b)) with the Koranyi-type
      // gauge N(w) = ((w2^2 + w3^2)^2 + 16 w1^2)^(1/4). The weight 16 comes
      // from the isomorphism onto the standard cross-term normalization of
      // the Heisenberg product; with it the triangle inequality is exact.
      Vec w = log_difference(a, b);
      const double planar = w(1) * w(1) + w(2) * w(2);
      return std::pow(planar * planar + 16.0 * w(0) * w(0), 0.25);
    }
    case GroupName::Torus2: {
      double s = 0.0;
      for (int i = 0; i < 2; ++i) {
        double d = wrap_centered(a.coords(i) - b.coords(i));
        s += d * d;
      }
      return std::sqrt(s);
    }
  }
  throw Error("unreachable");
}

double GroupSpec::distance_logchart(const GroupPoint& a,
                                    const GroupPoint& b) const {
  return log_difference(a, b).norm();
}

Vec GroupSpec::log_difference(const GroupPoint& a, const GroupPoint& b) const {
  validate(a);
  validate(b);
  switch (name_) {
    case GroupName::EuclideanD:
      return b.coords - a.coords;
    case GroupName::AffPlus: {
      // a^-1 b = (b1/a1, (b2 - a2)/a1)
      Vec r(2);
      r(0) = std::log(b.coords(0) / a.coords(0));
      r(1) = (b.coords(1) - a.coords(1)) / a.coords(0) / expm1_over(r(0));
      return r;
    }
    case GroupName::Heisenberg3: {
      const double d1 = b.coords(0) - a.coords(0);
      const double d2 = b.coords(1) - a.coords(1);
      const double d3 = b.coords(2) - a.coords(2);
      Vec r(3);
      r(0) = d1 - a.coords(1) * d3 - d2 * d3 / 2.0;
      r(1) = d2;
      r(2) = d3;
      return r;
    }
    case GroupName::Torus2:
      return -chart_delta(a, b);
  }
  throw Error("unreachable");
}

Mat GroupSpec::ad(const AlgebraVector& x) const {
  if (x.dim() != dim_) throw ChartViolation("algebra vector dimension mismatch");
  Mat m = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) m += x.coords(i) * struct_consts_[i];
  return m;
}

Vec GroupSpec::chart_delta(const GroupPoint& a, const GroupPoint& b) const {
  Vec d = a.coords - b.coords;
  if (name_ == GroupName::Torus2) {
    for (int i = 0; i < d.size(); ++i) d(i) = wrap_centered(d(i));
  }
  return d;
}

double chart_distance(const GroupSpec& g, const GroupPoint& a,
                      const GroupPoint& b) {
  Vec d = g.chart_delta(a, b);
  double worst = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    double scale = std::max({1.0, std::abs(a.coords(i)), std::abs(b.coords(i))});
    worst = std::max(worst, std::abs(d(i)) / scale);
  }
  return worst;
}

}  // namespace lgent
