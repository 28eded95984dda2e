#include "lgent/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>

#include "lgent/tolerances.hpp"

namespace lgent {

namespace {

// Canonical representative of a conjugate pair.
std::complex<double> canonical(std::complex<double> z) {
  return {z.real(), std::abs(z.imag())};
}

struct Cluster {
  std::complex<double> mean;  // canonical mean; robust for defective groups
  int multiplicity = 0;       // counting conjugates
  std::complex<double> sum{0.0, 0.0};
};

std::vector<Cluster> cluster_eigenvalues(const Spectrum& s) {
  std::vector<Cluster> clusters;
  for (const auto& ev : s.eigenvalues) {
    const std::complex<double> z = canonical(ev);
    Cluster* best = nullptr;
    double best_dist = 0.0;
    for (auto& c : clusters) {
      double tol = 1e-6 * std::max(1.0, std::abs(c.mean));
      double dist = std::abs(z - c.mean);
      if (dist <= tol && (!best || dist < best_dist)) {
        best = &c;
        best_dist = dist;
      }
    }
    if (!best) {
      clusters.push_back(Cluster{z, 1, z});
    } else {
      best->sum += z;
      best->multiplicity += 1;
      best->mean = best->sum / static_cast<double>(best->multiplicity);
    }
  }
  // Imaginary parts that survive clustering but are numerical noise collapse
  // to the real axis so the factor degree below stays right.
  for (auto& c : clusters) {
    if (std::abs(c.mean.imag()) <= 1e-9 * std::max(1.0, std::abs(c.mean))) {
      c.mean = {c.mean.real(), 0.0};
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    double ma = std::abs(a.mean), mb = std::abs(b.mean);
    if (ma != mb) return ma > mb;
    if (a.mean.real() != b.mean.real()) return a.mean.real() > b.mean.real();
    return a.mean.imag() < b.mean.imag();
  });
  return clusters;
}

// Orthonormal real basis of the generalized eigenspace of one cluster:
// null space of the (normalized) real factor raised to the multiplicity.
Mat cluster_basis(const Mat& d, const Cluster& c) {
  const int n = static_cast<int>(d.rows());
  Mat factor;
  if (c.mean.imag() == 0.0) {
    factor = d - c.mean.real() * Mat::Identity(n, n);
  } else {
    factor = d * d - 2.0 * c.mean.real() * d +
             std::norm(c.mean) * Mat::Identity(n, n);
  }
  double scale = factor.norm();
  if (scale > 0.0) factor /= scale;
  Mat power = Mat::Identity(n, n);
  for (int i = 0; i < c.multiplicity; ++i) power = factor * power;

  Eigen::JacobiSVD<Mat> svd(power, Eigen::ComputeFullV);
  Mat basis = svd.matrixV().rightCols(c.multiplicity);
  // Deterministic sign: largest-magnitude entry of each column positive.
  for (int j = 0; j < basis.cols(); ++j) {
    int imax = 0;
    basis.col(j).cwiseAbs().maxCoeff(&imax);
    if (basis(imax, j) < 0.0) basis.col(j) = -basis.col(j);
  }
  return basis;
}

double invariance_residual(const Mat& d, const Mat& basis) {
  if (basis.cols() == 0) return 0.0;
  Mat db = d * basis;
  Mat proj = basis * (basis.transpose() * db);
  return (db - proj).norm();
}

Mat concat_columns(const std::vector<Mat>& blocks, int rows) {
  int cols = 0;
  for (const auto& b : blocks) cols += static_cast<int>(b.cols());
  Mat out(rows, cols);
  int at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += static_cast<int>(b.cols());
  }
  return out;
}

double wrap_centered(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;
  return (y >= 0.5) ? y - 1.0 : y;
}

}  // namespace

Mat fd_differential(const LinearSystem& sys, int n_iterations) {
  const GroupSpec& g = sys.group();
  const int d = g.dimension();
  const double h = tol().fd_step;
  Mat j(d, d);
  for (int col = 0; col < d; ++col) {
    Vec plus = Vec::Zero(d), minus = Vec::Zero(d);
    plus(col) = h;
    minus(col) = -h;
    AlgebraVector fp = g.log_map(
        sys.f0_pow(g.exp_map(AlgebraVector(plus)), n_iterations));
    AlgebraVector fm = g.log_map(
        sys.f0_pow(g.exp_map(AlgebraVector(minus)), n_iterations));
    j.col(col) = (fp.coords - fm.coords) / (2.0 * h);
  }
  return j;
}

Differential differential_at_identity(const LinearSystem& sys) {
  Mat d;
  Mat fd = fd_differential(sys, 1);
  if (sys.analytic_differential()) {
    d = *sys.analytic_differential();
    double worst = 0.0;
    for (int r = 0; r < d.rows(); ++r) {
      for (int c = 0; c < d.cols(); ++c) {
        double scale = std::max(1.0, std::abs(d(r, c)));
        worst = std::max(worst, std::abs(d(r, c) - fd(r, c)) / scale);
      }
    }
    if (worst > tol().fd_jacobian) {
      throw ConvergenceFailure(
          "analytic differential disagrees with finite differences by " +
          std::to_string(worst));
    }
  } else {
    d = fd;
  }
  if (std::abs(d.determinant()) <= tol().det_floor) {
    throw SingularDifferential("differential at identity is singular");
  }
  return Differential{d};
}

Spectrum eigen_spectrum(const Mat& d) {
  if (std::abs(d.determinant()) <= tol().det_floor) {
    throw SingularDifferential("spectrum requested for a singular matrix");
  }
  Eigen::EigenSolver<Mat> solver(d);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eigenvalue iteration failed");
  }
  Spectrum s;
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const double scale = std::max(1.0, d.norm());
  for (int i = 0; i < values.size(); ++i) {
    double residual = (d.cast<std::complex<double>>() * vectors.col(i) -
                       values(i) * vectors.col(i))
                          .norm();
    if (residual > tol().eigen_residual * scale) {
      throw ConvergenceFailure("eigenpair residual " + std::to_string(residual));
    }
    s.eigenvalues.push_back(values(i));
  }
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  return s;
}

SubalgebraSplit split_subalgebras(const Mat& d, double eta) {
  const int n = static_cast<int>(d.rows());
  Spectrum s = eigen_spectrum(d);
  std::vector<Cluster> clusters = cluster_eigenvalues(s);

  SubalgebraSplit split;
  split.eta = eta;
  std::vector<Mat> plus_blocks, zero_blocks, minus_blocks;
  for (const auto& c : clusters) {
    double m = std::abs(c.mean);
    Mat basis = cluster_basis(d, c);
    double inv_res = invariance_residual(d, basis);
    if (inv_res > tol().subspace_invariance) {
      throw ConvergenceFailure("eigenspace basis not D-invariant, residual " +
                               std::to_string(inv_res));
    }
    split.components.push_back(EigenspaceComponent{c.mean, c.multiplicity, basis});
    if (std::abs(m - 1.0) <= tol().unit_modulus_exact) {
      zero_blocks.push_back(basis);
    } else if (std::abs(m - 1.0) <= eta) {
      throw AmbiguousClassification(
          "eigenvalue modulus within eta of 1 but not detected as unit: |a| = " +
          std::to_string(m));
    } else if (m > 1.0) {
      plus_blocks.push_back(basis);
    } else {
      minus_blocks.push_back(basis);
    }
  }
  split.basis_plus = concat_columns(plus_blocks, n);
  split.basis_zero = concat_columns(zero_blocks, n);
  split.basis_minus = concat_columns(minus_blocks, n);

  if (split.dim_plus() + split.dim_zero() + split.dim_minus() != n) {
    throw ConvergenceFailure("subalgebra dimensions do not sum to d");
  }
  Mat all = concat_columns({split.basis_plus, split.basis_zero, split.basis_minus}, n);
  Eigen::FullPivLU<Mat> lu(all);
  if (lu.rank() != n) {
    throw ConvergenceFailure("subalgebra bases do not span the algebra");
  }
  return split;
}

double bowen_entropy(const Spectrum& s, double log_base) {
  double nats = 0.0;
  for (const auto& ev : s.eigenvalues) {
    double m = std::abs(ev);
    if (m > 1.0 + tol().unit_modulus_eta) nats += std::log(m);
  }
  return nats / std::log(log_base);
}

GrowthBounds growth_constants(const Mat& d, const SubalgebraSplit& split,
                              int horizon) {
  GrowthBounds out;
  out.horizon = horizon;
  const int np = split.dim_plus();
  const int nm = split.dim_minus();
  if (np == 0 && nm == 0) return out;
  out.nontrivial = true;

  // Iterate the restrictions of D to the invariant subspaces, in their
  // orthonormal bases. Powering the full matrix instead would let the
  // O(machine-eps) unstable component of the computed stable basis grow as
  // lambda_max^n and swamp the contraction beyond n ~ 20.
  const Mat m_plus = split.basis_plus.transpose() * d * split.basis_plus;
  const Mat m_minus = split.basis_minus.transpose() * d * split.basis_minus;

  double sigma_req = 0.0;
  {
    Mat pow_p = Mat::Identity(np, np);
    Mat pow_m = Mat::Identity(nm, nm);
    for (int n = 1; n <= horizon; ++n) {
      pow_p = m_plus * pow_p;
      pow_m = m_minus * pow_m;
      for (int j = 0; j < np; ++j) {
        sigma_req = std::max(sigma_req, std::pow(1.0 / pow_p.col(j).norm(), 1.0 / n));
      }
      for (int j = 0; j < nm; ++j) {
        sigma_req = std::max(sigma_req, std::pow(pow_m.col(j).norm(), 1.0 / n));
      }
    }
  }
  double sigma = sigma_req * (1.0 + 1e-9);
  if (!(sigma < 1.0)) {
    throw FitFailure("no sigma < 1 satisfies the growth bounds (sigma_req = " +
                     std::to_string(sigma_req) + ")");
  }

  double c_ub = std::numeric_limits<double>::infinity();
  {
    Mat pow_p = Mat::Identity(np, np);
    Mat pow_m = Mat::Identity(nm, nm);
    double sig_n = 1.0;
    for (int n = 1; n <= horizon; ++n) {
      pow_p = m_plus * pow_p;
      pow_m = m_minus * pow_m;
      sig_n *= sigma;
      for (int j = 0; j < np; ++j) {
        c_ub = std::min(c_ub, pow_p.col(j).norm() * sig_n);
      }
      for (int j = 0; j < nm; ++j) {
        c_ub = std::min(c_ub, sig_n / pow_m.col(j).norm());
      }
    }
  }
  if (c_ub < 1.0 - 1e-9) {
    throw FitFailure(
        "transient contraction on the sampled range forces c < 1 (c_ub = " +
        std::to_string(c_ub) + "); basis may be misclassified");
  }
  out.c = std::max(1.0, c_ub);  // largest admissible c, clamped into [1, inf)
  out.sigma = sigma;
  return out;
}

BracketClosureReport bracket_closure_check(const GroupSpec& g,
                                           const SubalgebraSplit& split) {
  BracketClosureReport report;
  const int d = g.dimension();
  for (const auto& ca : split.components) {
    for (const auto& cb : split.components) {
      // Conjugate-closed product set {alpha*beta, alpha*conj(beta)}.
      std::vector<std::complex<double>> products = {
          canonical(ca.eigenvalue * cb.eigenvalue),
          canonical(ca.eigenvalue * std::conj(cb.eigenvalue))};
      if (std::abs(products[0] - products[1]) < 1e-9) products.pop_back();

      std::vector<Mat> target_blocks;
      bool any_eigen = false;
      for (const auto& p : products) {
        for (const auto& cc : split.components) {
          if (std::abs(cc.eigenvalue - p) <=
              1e-6 * std::max(1.0, std::abs(p))) {
            target_blocks.push_back(cc.basis);
            any_eigen = true;
          }
        }
      }
      Mat target = concat_columns(target_blocks, d);

      for (int i = 0; i < ca.basis.cols(); ++i) {
        for (int j = 0; j < cb.basis.cols(); ++j) {
          Vec bracket = g.ad(AlgebraVector(ca.basis.col(i))) * cb.basis.col(j);
          double residual;
          if (target.cols() == 0) {
            residual = bracket.norm();
          } else {
            Eigen::HouseholderQR<Mat> qr(target);
            Mat q = qr.householderQ() * Mat::Identity(d, target.cols());
            residual = (bracket - q * (q.transpose() * bracket)).norm();
          }
          BracketCheckEntry entry;
          entry.alpha = ca.eigenvalue;
          entry.beta = cb.eigenvalue;
          entry.product = ca.eigenvalue * cb.eigenvalue;
          entry.product_is_eigenvalue = any_eigen;
          entry.residual = residual;
          report.entries.push_back(entry);
          report.worst_residual = std::max(report.worst_residual, residual);
        }
      }
    }
  }
  report.pass = report.worst_residual <= tol().bracket_residual;
  return report;
}

TraceAdReport trace_ad_check(const GroupSpec& g, const SubalgebraSplit& split) {
  TraceAdReport report;
  const int d = g.dimension();
  auto check = [&](const Mat& basis) {
    for (int j = 0; j < basis.cols(); ++j) {
      Mat ad = g.ad(AlgebraVector(basis.col(j)));
      report.worst_trace = std::max(report.worst_trace, std::abs(ad.trace()));
      Mat power = Mat::Identity(d, d);
      for (int i = 0; i < d; ++i) power = ad * power;
      report.worst_nilpotency = std::max(report.worst_nilpotency, power.norm());
      ++report.vectors_checked;
    }
  };
  check(split.basis_minus);
  check(split.basis_plus);
  report.pass = report.worst_trace <= tol().trace_ad &&
                report.worst_nilpotency <= tol().trace_ad;
  return report;
}

ClosednessMetadata closedness_metadata(const GroupSpec& g,
                                       const SubalgebraSplit& split) {
  ClosednessMetadata meta;
  auto classify = [&](int dim, bool& closed, const char* side) -> std::string {
    if (dim == 0) {
      closed = true;
      return std::string(side) + " subalgebra trivial";
    }
    if (g.simply_connected()) {
      closed = true;
      return std::string("group simply connected");
    }
    closed = false;
    return std::string(side) +
           " subgroup dense line on a non-simply-connected group";
  };
  std::string r1 = classify(split.dim_minus(), meta.stable_closed, "stable");
  std::string r2 = classify(split.dim_plus(), meta.unstable_closed, "unstable");
  meta.reason = "stable: " + r1 + "; unstable: " + r2;
  return meta;
}

DensityWitnessReport density_witness_torus(const Vec& direction, double eps,
                                           double t_max, int grid_per_side) {
  if (direction.size() != 2) throw ConfigError("direction must be 2-d");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  Vec dir = direction;
  double norm = dir.norm();
  if (norm == 0.0) throw ConfigError("direction must be nonzero");
  dir /= norm;

  DensityWitnessReport report;
  report.grid_per_side = grid_per_side;
  report.eps = eps;
  report.t_max = t_max;
  const int n_targets = grid_per_side * grid_per_side;
  report.hit_times.assign(n_targets, -1.0);

  const double dt = eps / 2.0;
  int remaining = n_targets;
  const long steps = static_cast<long>(std::ceil(t_max / dt));
  for (long k = 0; k <= steps && remaining > 0; ++k) {
    const double t = std::min(k * dt, t_max);
    const double px = t * dir(0) - std::floor(t * dir(0));
    const double py = t * dir(1) - std::floor(t * dir(1));
    // Only grid nodes in the eps-window around (px, py) can be hit.
    const int ix_lo = static_cast<int>(std::floor((px - eps) * grid_per_side));
    const int ix_hi = static_cast<int>(std::ceil((px + eps) * grid_per_side));
    const int iy_lo = static_cast<int>(std::floor((py - eps) * grid_per_side));
    const int iy_hi = static_cast<int>(std::ceil((py + eps) * grid_per_side));
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        const int wx = ((ix % grid_per_side) + grid_per_side) % grid_per_side;
        const int wy = ((iy % grid_per_side) + grid_per_side) % grid_per_side;
        const int id = wx * grid_per_side + wy;
        if (report.hit_times[id] >= 0.0) continue;
        const double dx = wrap_centered(px - static_cast<double>(wx) / grid_per_side);
        const double dy = wrap_centered(py - static_cast<double>(wy) / grid_per_side);
        if (std::sqrt(dx * dx + dy * dy) < eps) {
          report.hit_times[id] = t;
          --remaining;
        }
      }
    }
  }
  for (int id = 0; id < n_targets; ++id) {
    if (report.hit_times[id] < 0.0) report.missed.push_back(id);
  }
  return report;
}

void require_witness(const DensityWitnessReport& report) {
  if (!report.complete()) {
    throw WitnessNotFound("density witness missed " +
                          std::to_string(report.missed.size()) +
                          " targets by t_max (not a refutation)");
  }
}

}  // namespace lgent
