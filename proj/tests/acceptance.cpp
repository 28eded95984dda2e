// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lgent/runner.hpp"
#include "oracles.hpp"

using namespace lgent;

namespace {

int failures = 0;

struct Criterion {
  const char* id;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  explicit Criterion(const char* id_) : id(id_) {}
  void report(bool pass, const std::string& detail) {
    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();
    std::printf("[%s] %s — %s (%.1f s)\n", id, pass ? "PASS" : "FAIL",
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<LinearSystem> all_presets() {
  std::vector<LinearSystem> out;
  for (const std::string& name : preset_names()) {
    out.push_back(make_system(make_preset_scenario(name)));
  }
  return out;
}

ControlWord random_word(const LinearSystem& sys, int len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, sys.control().alphabet_size() - 1);
  ControlWord w;
  for (int i = 0; i < len; ++i) w.letters.push_back(pick(rng));
  return w;
}

// Criterion 1: solution-formula equivalence on all four presets.
void criterion_solution_formula() {
  Criterion c("criterion 1");
  double worst = 0.0;
  std::string worst_preset;
  for (const LinearSystem& sys : all_presets()) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
      GroupPoint g = oracles::sample_point(sys.group(), rng);
      const int k = static_cast<int>(rng() % 11);
      ControlWord w = random_word(sys, k, rng);
      auto direct = sys.trajectory_direct(k, g, w);
      auto translated = sys.trajectory_translated(k, g, w);
      for (int j = 0; j <= k; ++j) {
        double d = chart_distance(sys.group(), direct[j], translated[j]);
        if (d > worst) {
          worst = d;
          worst_preset = sys.name();
        }
      }
    }
  }
  c.report(worst <= 1e-10, "max relative chart distance " + fmt(worst) +
                               (worst_preset.empty() ? "" : " (" + worst_preset + ")"));
}

// Criterion 2: spectral ground truth against the printed matrices.
void criterion_spectral_ground_truth() {
  Criterion c("criterion 2");
  bool pass = true;
  std::string detail;

  Mat aff = differential_at_identity(
                make_system(make_preset_scenario("aff_example"))).d;
  Mat aff_expect(2, 2);
  aff_expect << 1.0, 0.0, 0.0, std::exp(2.0);
  double aff_err = (aff - aff_expect).lpNorm<Eigen::Infinity>();
  pass &= aff_err <= 1e-9;
  detail += "aff diff err " + fmt(aff_err);

  Spectrum heis = eigen_spectrum(
      differential_at_identity(make_system(make_preset_scenario("heisenberg_example"))).d);
  double heis_err = 0.0;
  for (const auto& ev : heis.eigenvalues) heis_err = std::max(heis_err, std::abs(ev - 1.0));
  pass &= heis.eigenvalues.size() == 3 && heis_err <= 1e-9;
  detail += ", heis eig err " + fmt(heis_err);

  Spectrum torus = eigen_spectrum(
      differential_at_identity(make_system(make_preset_scenario("torus_cat"))).d);
  double l1 = (3.0 + std::sqrt(5.0)) / 2.0, l2 = (3.0 - std::sqrt(5.0)) / 2.0;
  double torus_err = std::max(std::abs(torus.eigenvalues[0] - l1),
                              std::abs(torus.eigenvalues[1] - l2));
  pass &= torus_err <= 1e-9;
  detail += ", torus eig err " + fmt(torus_err);
  c.report(pass, detail);
}

// Criterion 3: Bowen bounds with the base-2 / natural-log flag.
void criterion_bowen_values() {
  Criterion c("criterion 3");
  Spectrum heis = eigen_spectrum(
      differential_at_identity(make_system(make_preset_scenario("heisenberg_example"))).d);
  Spectrum aff = eigen_spectrum(
      differential_at_identity(make_system(make_preset_scenario("aff_example"))).d);
  Spectrum torus = eigen_spectrum(
      differential_at_identity(make_system(make_preset_scenario("torus_cat"))).d);

  double heis_bound = bowen_entropy(heis, 2.0);
  double aff_nats = bowen_entropy(aff, std::exp(1.0));
  double aff_bits = bowen_entropy(aff, 2.0);
  double torus_bits = bowen_entropy(torus, 2.0);

  bool pass = heis_bound == 0.0;
  pass &= std::abs(aff_nats - 2.0) <= 1e-9;
  pass &= std::abs(aff_bits - 2.0 * std::log2(std::exp(1.0))) <= 1e-9;
  pass &= std::abs(torus_bits - std::log2((3.0 + std::sqrt(5.0)) / 2.0)) <= 1e-9;
  pass &= std::abs(torus_bits - 1.3885) <= 5e-4;
  c.report(pass, "heis " + fmt(heis_bound) + ", aff " + fmt(aff_nats) +
                     " nats / " + fmt(aff_bits) + " bits (log-base mismatch "
                     "between the declared base-2 convention and the stated "
                     "value is flagged in reports), torus " + fmt(torus_bits) +
                     " bits");
}

// Criterion 4: Theorem sandwich on the scalar doubling benchmark.
void criterion_euclid_sandwich() {
  Criterion c("criterion 4");
  Scenario s = make_preset_scenario("euclid_ab");
  RunReport report = run_scenario(s);

  const double bound_slope = report.measure_bound ? report.measure_bound->slope : -1.0;
  const bool slope_exact = report.measure_bound && bound_slope == 1.0;

  // exact-mode oracle at n <= 6: greedy within factor 2 of the certified minimum
  LinearSystem sys = make_system(s);
  AdmissiblePair pair = AdmissiblePair::build(sys.group(), s.pair.k_box,
                                              s.pair.q_box, 0.05, s.rho);
  AdmissibilityCertificate cert = certify_admissible(sys, pair, 6, 0.0, s.budget);
  SpanningResult greedy6 = r_inv_estimate(sys, pair, cert, 6, 0.05,
                                          CoverMethod::greedy, s.budget);
  // the exhaustive n=6 universe needs an explicit budget above the default cap
  SpanningResult exact6 = r_inv_estimate(sys, pair, cert, 6, 0.05,
                                         CoverMethod::exact, 20000000LL);
  const bool factor2 = exact6.r_inv <= greedy6.r_inv &&
                       greedy6.r_inv <= 2 * exact6.r_inv;

  const double slope = report.estimate_slope;
  const bool slope_in_window = slope >= 0.85 && slope <= 1.15;

  // Diagnostic at a grid that resolves the horizon: the pinned rho = 0.01
  // saturates the 101-point grid at n >= 8 (each word then serves at most
  // one grid point), so the same estimator is also run on a finer grid.
  Scenario fine = s;
  fine.name = "euclid_ab_fine_diagnostic";
  fine.pair.k_box = Box::from_flat({-0.05, 0.05});
  fine.rho = 5e-5;
  RunReport fine_report = run_scenario(fine);
  const bool fine_ok = fine_report.estimate_slope >= 0.85 &&
                       fine_report.estimate_slope <= 1.15;

  bool pass = slope_exact && factor2 && slope_in_window;
  c.report(pass,
           "measure slope " + fmt(bound_slope) + (slope_exact ? " (exact)" : "") +
               ", greedy/exact at n=6: " + std::to_string(greedy6.r_inv) + "/" +
               std::to_string(exact6.r_inv) + (factor2 ? " (within 2x)" : "") +
               ", fitted slope " + fmt(slope) + " at pinned rho=0.01" +
               (slope_in_window ? "" : " [outside 0.85..1.15; the pinned grid "
                                       "saturates for n >= 8]") +
               "; fine-grid diagnostic slope " + fmt(fine_report.estimate_slope) +
               (fine_ok ? " (in window)" : " (out of window)"));
}

// Criterion 5: zero-entropy Heisenberg pair.
void criterion_heisenberg_zero() {
  Criterion c("criterion 5");
  Scenario s = make_preset_scenario("heisenberg_example");
  RunReport report = run_scenario(s);
  bool pass = report.estimate_slope <= 0.1 && report.verdict.pass;
  c.report(pass, "fitted slope " + fmt(report.estimate_slope) +
                     " bits over n=4..12, verdict " +
                     (report.verdict.pass ? "PASS" : "FAIL"));
}

// Criterion 6: separated-set estimator on the torus cat map.
void criterion_torus_separated() {
  Criterion c("criterion 6");
  Scenario s = make_preset_scenario("torus_cat");
  RunReport report = run_scenario(s);
  const double target = std::log2((3.0 + std::sqrt(5.0)) / 2.0);
  const double err = std::abs(report.estimate_slope - target);
  bool pass = err <= 0.2 && report.separated_spanning_failures == 0;
  c.report(pass, "separated slope " + fmt(report.estimate_slope) + " vs " +
                     fmt(target) + " (err " + fmt(err) + "), spanning failures " +
                     std::to_string(report.separated_spanning_failures));
}

// Criterion 7: structural property suite.
void criterion_structural() {
  Criterion c("criterion 7");
  bool pass = true;
  std::string detail;

  // separated-maximal => spanning, on several instances
  {
    long long fail_count = 0;
    Mat rot(2, 2), b(2, 1);
    rot << std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0);
    b << 1.0, 0.0;
    LinearSystem iso = make_euclidean_system(rot, b, Box::from_flat({-1.0, 1.0}), 0.5);
    AdmissiblePair pair = AdmissiblePair::build(
        iso.group(), Box::from_flat({-0.5, 0.5, -0.5, 0.5}),
        Box::from_flat({-2.0, 2.0, -2.0, 2.0}), 0.2, 0.05);
    for (int n = 1; n <= 6; ++n) {
      SeparatedResult res = separated_set(iso, pair.k_grid, n, 0.2);
      fail_count += count_spanning_failures(iso, pair.k_grid, res);
    }
    LinearSystem cat = make_torus_cat_system();
    Vec dir(2);
    dir << 1.0, 0.0;
    AdmissiblePair seg = AdmissiblePair::build_segment(
        cat.group(), dir, 1.0, 0.8 * 0.2 * std::pow((3.0 - std::sqrt(5.0)) / 2.0, 6),
        Box::from_flat({0.0, 1.0, 0.0, 1.0}), 0.2);
    for (int n = 2; n <= 6; ++n) {
      SeparatedResult res = separated_set(cat, seg.k_grid, n, 0.2);
      fail_count += count_spanning_failures(cat, seg.k_grid, res);
    }
    pass &= fail_count == 0;
    detail += "sep=>span failures " + std::to_string(fail_count);
  }

  // r_inv monotone in n and eps; exact <= greedy (exact mode on a small case)
  {
    Mat a(1, 1), bb(1, 1);
    a << 2.0;
    bb << 1.0;
    LinearSystem sys = make_euclidean_system(a, bb, Box::from_flat({-1.0, 1.0}), 0.5);
    AdmissiblePair pair = AdmissiblePair::build(sys.group(),
                                                Box::from_flat({-0.5, 0.5}),
                                                Box::from_flat({-1.0, 1.0}),
                                                0.2, 0.05);
    AdmissibilityCertificate cert = certify_admissible(sys, pair, 6);
    bool mono_n = true, exact_le_greedy = true, replay_ok = true;
    long long prev = 0;
    for (int n = 1; n <= 5; ++n) {
      SpanningResult ex = r_inv_estimate(sys, pair, cert, n, 0.2, CoverMethod::exact);
      SpanningResult gr = r_inv_estimate(sys, pair, cert, n, 0.2, CoverMethod::greedy);
      mono_n &= ex.r_inv >= prev;
      exact_le_greedy &= ex.r_inv <= gr.r_inv;
      replay_ok &= verify_spanning(sys, pair, ex) && verify_spanning(sys, pair, gr);
      prev = ex.r_inv;
    }
    SpanningResult tight = r_inv_estimate(sys, pair, cert, 4, 0.1, CoverMethod::exact);
    SpanningResult loose = r_inv_estimate(sys, pair, cert, 4, 0.4, CoverMethod::exact);
    bool mono_eps = tight.r_inv >= loose.r_inv;
    pass &= mono_n && mono_eps && exact_le_greedy && replay_ok;
    detail += std::string(", monotone n ") + (mono_n ? "ok" : "FAIL") +
              ", monotone eps " + (mono_eps ? "ok" : "FAIL") +
              ", exact<=greedy " + (exact_le_greedy ? "ok" : "FAIL") +
              ", replay " + (replay_ok ? "ok" : "FAIL");
  }

  // semi-conjugacy and lift independence on the diagonal quotient
  {
    Mat a(2, 2), bb(2, 1);
    a << 0.5, 0.0, 0.0, 3.0;
    bb << 1.0, 1.0;
    LinearSystem sys = make_euclidean_system(a, bb, Box::from_flat({-1.0, 1.0}), 0.5);
    SubalgebraSplit split = split_subalgebras(*sys.analytic_differential());
    QuotientChart chart = QuotientChart::build(
        sys.group(), split, closedness_metadata(sys.group(), split));
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      GroupPoint g = oracles::sample_point(sys.group(), rng);
      const int k = static_cast<int>(rng() % 11);
      ControlWord w = random_word(sys, k, rng);
      auto full = sys.trajectory_direct(k, g, w);
      auto induced = induced_trajectory(chart, sys, k, chart.project(g), w);
      for (int j = 0; j <= k; ++j) {
        worst = std::max(worst, (chart.project(full[j]) - induced[j]).norm());
      }
      Vec h = Vec::Zero(2);
      h(0) = 2.0 * unif(rng);
      auto shifted = induced_trajectory(
          chart, sys, k, chart.project(sys.group().product(g, sys.group().make_point(h))), w);
      for (int j = 0; j <= k; ++j) {
        worst = std::max(worst, (induced[j] - shifted[j]).norm());
      }
    }
    pass &= worst <= 1e-9;
    detail += ", semiconj/lift worst " + fmt(worst);
  }

  // bracket closure and tr(ad) residuals on all presets
  {
    double worst = 0.0;
    for (const LinearSystem& sys : all_presets()) {
      SubalgebraSplit split = split_subalgebras(*sys.analytic_differential());
      worst = std::max(worst, bracket_closure_check(sys.group(), split).worst_residual);
      TraceAdReport tr = trace_ad_check(sys.group(), split);
      worst = std::max({worst, tr.worst_trace, tr.worst_nilpotency});
    }
    pass &= worst <= 1e-9;
    detail += ", bracket/trace worst " + fmt(worst);
  }

  // byte-determinism of emitted files
  {
    Scenario s = make_preset_scenario("euclid_ab");
    s.name = "det_check";
    s.delta = 0.25;
    s.rho = 0.0125;
    s.pair.k_box = Box::from_flat({-0.2, 0.2});
    s.n_min = 2;
    s.n_max = 5;
    s.pair.horizon = 5;
    RunReport r1 = run_scenario(s);
    RunReport r2 = run_scenario(s);
    auto dir = std::filesystem::temp_directory_path() / "lgent_acc_det";
    std::filesystem::remove_all(dir);
    auto f1 = emit_report(r1, (dir / "a").string());
    auto f2 = emit_report(r2, (dir / "b").string());
    bool identical = f1.size() == f2.size();
    for (size_t i = 0; identical && i < f1.size(); ++i) {
      std::ifstream in1(f1[i], std::ios::binary), in2(f2[i], std::ios::binary);
      std::stringstream s1, s2;
      s1 << in1.rdbuf();
      s2 << in2.rdbuf();
      identical = s1.str() == s2.str();
    }
    pass &= identical;
    detail += std::string(", determinism ") + (identical ? "ok" : "FAIL");
  }

  c.report(pass, detail);
}

// Criterion 8: torus density witness.
void criterion_density_witness() {
  Criterion c("criterion 8");
  SubalgebraSplit split = split_subalgebras(
      *make_system(make_preset_scenario("torus_cat")).analytic_differential());
  DensityWitnessReport golden =
      density_witness_torus(split.basis_plus.col(0), 0.05, 10000.0, 20);
  Vec rational(2);
  rational << 1.0, 0.0;
  DensityWitnessReport flat = density_witness_torus(rational, 0.1, 10000.0, 20);
  bool rational_misses_center = false;
  for (int id : flat.missed) {
    if (id == 10 * 20 + 10) rational_misses_center = true;
  }
  bool pass = golden.complete() && rational_misses_center;
  double max_t = 0.0;
  for (double t : golden.hit_times) max_t = std::max(max_t, t);
  c.report(pass, "golden direction complete (last target at t=" + fmt(max_t) +
                     "), rational direction misses (0.5, 0.5) as expected");
}

}  // namespace

int main() {
  criterion_solution_formula();
  criterion_spectral_ground_truth();
  criterion_bowen_values();
  criterion_euclid_sandwich();
  criterion_heisenberg_zero();
  criterion_torus_separated();
  criterion_structural();
  criterion_density_witness();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
