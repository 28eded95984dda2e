#include "lgent/quotient.hpp"

#include <cmath>
#include <random>

#include "lgent/neighborhood.hpp"
#include "lgent/tolerances.hpp"

namespace lgent {

namespace {

Mat concat(const Mat& a, const Mat& b, const Mat& c, int rows) {
  Mat out(rows, a.cols() + b.cols() + c.cols());
  out.leftCols(a.cols()) = a;
  out.middleCols(a.cols(), b.cols()) = b;
  out.rightCols(c.cols()) = c;
  return out;
}

// Exact image box of an axis-aligned box under a linear map, via corners.
Box linear_image_box(const Mat& map, const Box& box) {
  const int d = box.dim();
  const int q = static_cast<int>(map.rows());
  Vec lo = Vec::Constant(q, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  const long corners = 1L << d;
  for (long mask = 0; mask < corners; ++mask) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = (mask >> i & 1) ? box.hi(i) : box.lo(i);
    Vec y = map * x;
    lo = lo.cwiseMin(y);
    hi = hi.cwiseMax(y);
  }
  return Box(lo, hi);
}

}  // namespace

QuotientChart QuotientChart::build(const GroupSpec& g,
                                   const SubalgebraSplit& split,
                                   const ClosednessMetadata& meta) {
  if (!meta.stable_closed) {
    throw StableSubgroupNotClosed(
        "quotient by G^- requires a closed stable subgroup (" + meta.reason + ")");
  }
  QuotientChart chart;
  chart.group_ = g;
  chart.stable_dim_ = split.dim_minus();
  chart.basis_ = concat(split.basis_minus, split.basis_zero, split.basis_plus,
                        g.dimension());
  Eigen::FullPivLU<Mat> lu(chart.basis_);
  if (lu.rank() != g.dimension()) {
    throw ConvergenceFailure("quotient basis is singular");
  }
  chart.basis_inverse_ = lu.inverse();
  return chart;
}

Vec QuotientChart::project(const GroupPoint& g) const {
  group_.validate(g);
  Vec full = basis_inverse_ * g.coords;
  return full.tail(quotient_dim());
}

GroupPoint QuotientChart::lift(const Vec& q) const {
  Vec full = Vec::Zero(group_.dimension());
  full.tail(quotient_dim()) = q;
  return group_.make_point(basis_ * full);
}

Vec QuotientChart::left_translate(const GroupPoint& g, const Vec& q) const {
  return project(group_.product(g, lift(q)));
}

double QuotientChart::left_translate_jacobian(const GroupPoint& g,
                                              const Vec& q) const {
  switch (group_.name()) {
    case GroupName::EuclideanD:
      return 1.0;
    case GroupName::Heisenberg3:
      return 1.0;  // shear in the chart
    case GroupName::AffPlus:
      (void)q;
      return g.coords(0) * g.coords(0);
    case GroupName::Torus2:
      return 1.0;
  }
  throw Error("unreachable");
}

InvariantMeasure make_invariant_measure(const QuotientChart& chart) {
  InvariantMeasure mu;
  switch (chart.group().name()) {
    case GroupName::AffPlus: {
      // Left Haar density dx dy / x^2 written in quotient coordinates.
      mu.name = "aff left Haar (x^-2 in chart)";
      mu.density = [chart](const Vec& q) {
        double x = chart.lift(q).coords(0);
        return 1.0 / (x * x);
      };
      break;
    }
    default:
      mu.name = "lebesgue in quotient chart";
      mu.density = [](const Vec&) { return 1.0; };
      break;
  }
  return mu;
}

double measure_invariance_defect(const QuotientChart& chart,
                                 const InvariantMeasure& mu,
                                 const GroupPoint& g,
                                 const std::vector<Vec>& samples) {
  double worst = 0.0;
  for (const Vec& q : samples) {
    double lhs = mu.density(chart.left_translate(g, q)) *
                 chart.left_translate_jacobian(g, q);
    double rhs = mu.density(q);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return worst;
}

Vec induced_step(const QuotientChart& chart, const LinearSystem& sys,
                 const Vec& q, int letter) {
  return chart.project(sys.step_letter(chart.lift(q), letter));
}

std::vector<Vec> induced_trajectory(const QuotientChart& chart,
                                    const LinearSystem& sys, int k,
                                    const Vec& q, const ControlWord& w) {
  if (k > w.length()) throw WordTooShort("horizon exceeds word length");
  std::vector<Vec> out;
  out.reserve(k + 1);
  out.push_back(q);
  for (int j = 0; j < k; ++j) {
    out.push_back(induced_step(chart, sys, out.back(), w.letters[j]));
  }
  return out;
}

Mat quotient_differential(const QuotientChart& chart, const Mat& d, int k) {
  if (k < 0) throw ConfigError("quotient differential needs k >= 0");
  const int s = chart.stable_dim();
  const int q = chart.quotient_dim();
  Mat full = chart.basis() .fullPivLu().solve(d * chart.basis());
  if (s > 0) {
    double coupling = full.block(0, s, s, q).norm();
    if (coupling > tol().subspace_invariance) {
      throw InvarianceViolated("complement is not invariant, coupling " +
                               std::to_string(coupling));
    }
  }
  Mat restricted = full.block(s, s, q, q);
  Mat out = Mat::Identity(q, q);
  for (int i = 0; i < k; ++i) out = restricted * out;
  return out;
}

VolumeEstimate estimate_volume(const InvariantMeasure& mu,
                               const Box& bounding_box, double resolution,
                               const std::function<bool(const Vec&)>& member,
                               unsigned long long seed, int mc_samples) {
  if (!(resolution > 0.0)) throw ConfigError("volume resolution must be positive");
  const int d = bounding_box.dim();
  std::vector<int> counts(d);
  double cell_vol = 1.0;
  for (int i = 0; i < d; ++i) {
    double len = bounding_box.hi(i) - bounding_box.lo(i);
    counts[i] = std::max(1, static_cast<int>(std::ceil(len / resolution)));
    cell_vol *= len / counts[i];
  }
  VolumeEstimate est;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec center(d);
    for (int i = 0; i < d; ++i) {
      double len = bounding_box.hi(i) - bounding_box.lo(i);
      center(i) = bounding_box.lo(i) + (idx[i] + 0.5) * len / counts[i];
    }
    if (member(center)) {
      est.box_counting += mu.density(center) * cell_vol;
      ++est.cells;
    }
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[axis] < counts[axis]) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double acc = 0.0;
  for (int k = 0; k < mc_samples; ++k) {
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      x(i) = bounding_box.lo(i) +
             unif(rng) * (bounding_box.hi(i) - bounding_box.lo(i));
    }
    if (member(x)) acc += mu.density(x);
  }
  est.monte_carlo = acc / mc_samples * bounding_box.volume();
  return est;
}

MeasureBound measure_lower_bound(const QuotientChart& chart,
                                 const InvariantMeasure& mu, const Mat& d,
                                 const Box& k_box, const Box& q_box,
                                 double eps, double log_base,
                                 double resolution, unsigned long long seed) {
  const GroupSpec& g = chart.group();
  const int s = chart.stable_dim();
  const Mat proj_rows = chart.basis().inverse().bottomRows(chart.quotient_dim());
  const Mat stable_rows = s > 0 ? Mat(chart.basis().inverse().topRows(s)) : Mat();

  // Membership of q in pi(K): search the stable fiber on a grid.
  std::function<bool(const Vec&)> in_pi_k;
  if (s == 0) {
    in_pi_k = [&](const Vec& q) {
      try {
        return k_box.contains(chart.lift(q).coords);
      } catch (const ChartViolation&) {
        return false;  // padded bounding cell outside the chart
      }
    };
  } else {
    Box fiber_range = linear_image_box(stable_rows, k_box);
    const double fiber_res = resolution / 2.0;
    in_pi_k = [&chart, &k_box, fiber_range, fiber_res, s](const Vec& q) {
      std::vector<int> counts(s);
      for (int i = 0; i < s; ++i) {
        double len = fiber_range.hi(i) - fiber_range.lo(i);
        counts[i] = std::max(2, static_cast<int>(std::ceil(len / fiber_res)) + 1);
      }
      std::vector<int> idx(s, 0);
      while (true) {
        Vec full = Vec::Zero(chart.group().dimension());
        for (int i = 0; i < s; ++i) {
          double len = fiber_range.hi(i) - fiber_range.lo(i);
          full(i) = fiber_range.lo(i) + idx[i] * len / (counts[i] - 1);
        }
        full.tail(q.size()) = q;
        if (k_box.contains(chart.basis() * full)) return true;
        int axis = s - 1;
        while (axis >= 0) {
          if (++idx[axis] < counts[axis]) break;
          idx[axis] = 0;
          --axis;
        }
        if (axis < 0) break;
      }
      return false;
    };
  }

  // Membership of q in N_eps(pi(Q)). For s = 0 the quotient is the group and
  // the group metric applies; for the Euclidean split cases the quotient
  // metric is Euclidean on the projected box (a conservative hull for skew
  // bases, which only weakens the bound).
  Box pi_q = linear_image_box(proj_rows, q_box);
  std::function<bool(const Vec&)> in_q_eps;
  if (s == 0) {
    in_q_eps = [&](const Vec& q) {
      try {
        return in_eps_neighborhood(g, q_box, eps, chart.lift(q));
      } catch (const ChartViolation&) {
        return false;
      }
    };
  } else {
    in_q_eps = [pi_q, eps](const Vec& q) {
      return pi_q.chart_distance_to(q) < eps;
    };
  }

  // Bounding boxes for counting, padded so the eps-neighborhood fits.
  Box pi_k = linear_image_box(proj_rows, k_box);
  double chart_scale = 1.0;
  for (int i = 0; i < pi_q.dim(); ++i) {
    chart_scale = std::max({chart_scale, std::abs(pi_q.lo(i)), std::abs(pi_q.hi(i))});
  }
  const double pad = 4.0 * eps * chart_scale;
  Box q_bounds(Vec(pi_q.lo.array() - pad), Vec(pi_q.hi.array() + pad));

  VolumeEstimate vk = estimate_volume(mu, pi_k, resolution, in_pi_k, seed);
  VolumeEstimate vq = estimate_volume(mu, q_bounds, resolution, in_q_eps, seed + 1);
  if (vk.box_counting <= 0.0) {
    throw ZeroMeasureK("pi(K) has zero measure at this resolution");
  }

  MeasureBound bound;
  bound.mu_k = vk.box_counting;
  bound.mu_q_eps = vq.box_counting;
  bound.det_complement = std::abs(quotient_differential(chart, d, 1).determinant());
  bound.slope = std::log(bound.det_complement) / std::log(log_base);
  return bound;
}

}  // namespace lgent
