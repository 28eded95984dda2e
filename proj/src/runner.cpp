#include "lgent/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace lgent {

namespace {

constexpr const char* kVersion = "lgent 0.1.0";

unsigned long long fnv1a(const std::string& text) {
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename F>
  auto time(const std::string& stage, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      auto t1 = std::chrono::steady_clock::now();
      sink_.push_back({stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
    } else {
      auto out = f();
      auto t1 = std::chrono::steady_clock::now();
      sink_.push_back({stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
      return out;
    }
  }

 private:
  std::vector<StageTiming>& sink_;
};

}  // namespace

RunReport run_scenario(const Scenario& s) {
  validate_scenario(s);
  RunReport r;
  r.name = s.name;
  r.preset = s.preset.empty() ? "inline_euclid" : s.preset;
  r.version = kVersion;
  r.canonical_config = canonical_dump(s);
  r.config_hash = fnv1a(r.canonical_config);
  r.delta = s.delta;
  r.rho = s.rho;
  StageClock clock(r.timings);

  LinearSystem sys = make_system(s);
  const GroupSpec& g = sys.group();
  const double eps_min = s.eps_list.back();
  const double lb = s.log_base;

  Differential diff = clock.time("differential", [&] {
    return differential_at_identity(sys);
  });
  r.differential = diff.d;

  Spectrum spectrum = clock.time("eigen", [&] { return eigen_spectrum(diff.d); });
  r.eigenvalues = spectrum.eigenvalues;

  SubalgebraSplit split = clock.time("split", [&] {
    return split_subalgebras(diff.d);
  });
  r.dim_plus = split.dim_plus();
  r.dim_zero = split.dim_zero();
  r.dim_minus = split.dim_minus();

  r.bowen_bits = bowen_entropy(spectrum, 2.0);
  r.bowen_nats = bowen_entropy(spectrum, std::exp(1.0));
  r.growth = clock.time("growth", [&] {
    return growth_constants(diff.d, split);
  });
  r.bracket = bracket_closure_check(g, split);
  r.trace_ad = trace_ad_check(g, split);
  r.closedness = closedness_metadata(g, split);

  if (g.name() == GroupName::Torus2 && split.dim_plus() > 0) {
    r.witness = clock.time("density_witness", [&] {
      return density_witness_torus(split.basis_plus.col(0), s.witness_eps,
                                   s.witness_tmax, s.witness_grid);
    });
  }

  std::optional<double> lower_slope;
  std::optional<QuotientChart> chart;
  clock.time("quotient_bound", [&] {
    try {
      chart = QuotientChart::build(g, split, r.closedness);
      if (s.estimator == "rinv") {
        InvariantMeasure mu = make_invariant_measure(*chart);
        r.measure_bound = measure_lower_bound(*chart, mu, diff.d, s.pair.k_box,
                                              s.pair.q_box, eps_min, lb,
                                              eps_min / 4.0, s.seed);
        lower_slope = r.measure_bound->slope;
      }
      r.quotient_enabled = true;
      r.quotient_note = "enabled";
    } catch (const StableSubgroupNotClosed& e) {
      r.quotient_enabled = false;
      r.quotient_note = std::string("StableSubgroupNotClosed: ") + e.what();
    } catch (const ZeroMeasureK& e) {
      r.quotient_enabled = false;
      r.quotient_note = std::string("ZeroMeasureK: ") + e.what();
    }
  });

  TheoremInputs inputs;
  inputs.bowen_upper = bowen_entropy(spectrum, lb);
  inputs.upper_tol = s.upper_tol;
  inputs.lower_tol = s.lower_tol;
  inputs.gate_lower = s.check_lower;

  if (s.estimator == "rinv") {
    AdmissiblePair pair = AdmissiblePair::build(g, s.pair.k_box, s.pair.q_box,
                                                eps_min, s.rho);
    r.grid_points = pair.k_grid.size();
    const int horizon = std::max(s.pair.horizon, s.n_max);
    AdmissibilityCertificate cert = clock.time("admissibility", [&] {
      return certify_admissible(sys, pair, horizon, 0.0, s.budget);
    });
    require_certificate(cert);
    r.certified = true;
    r.certificate_evaluations = cert.evaluations;

    r.sweep = clock.time("rinv_sweep", [&] {
      return outer_entropy_sweep(sys, pair, cert, s.eps_list, s.n_min, s.n_max,
                                 s.mode, s.budget, lb);
    });
    r.estimate_slope = r.sweep.sup_slope;

    inputs.estimate_slope = r.estimate_slope;
    inputs.lower_slope = lower_slope;
    // Pointwise bound <= r_inv gate, on one-dimensional Euclidean quotients
    // where the grid-level form of the inequality is rigorous: a cover of the
    // rho-net leaves at most r+1 gaps of measure < rho each, so
    // mu(K) - (r+1) rho <= r mu(N_eps) det^-n.
    if (r.measure_bound && chart && chart->quotient_dim() == 1 &&
        g.name() == GroupName::EuclideanD) {
      for (const SweepCell& cell : r.sweep.cells) {
        if (cell.eps != eps_min) continue;
        double mu_eff =
            r.measure_bound->mu_k - (cell.r_inv + 1) * s.rho;
        if (mu_eff <= 0.0) continue;  // grid too coarse to witness the bound
        double log_bound = (std::log(mu_eff / r.measure_bound->mu_q_eps) +
                            cell.n * std::log(r.measure_bound->det_complement)) /
                           std::log(lb);
        inputs.pointwise_log.emplace_back(
            log_bound, std::log(static_cast<double>(cell.r_inv)) / std::log(lb));
      }
    }
  } else {
    // Separated-set topological-entropy estimator (uncontrolled system).
    double spacing = eps_min / 4.0;
    if (r.growth.nontrivial) {
      spacing = std::min(spacing,
                         0.8 * eps_min * std::pow(r.growth.sigma, s.n_max));
    }
    if (!s.pair.segment_direction) {
      throw ConfigError("separated estimator needs pair.segment_direction");
    }
    AdmissiblePair pair = AdmissiblePair::build_segment(
        g, *s.pair.segment_direction, s.pair.segment_length, spacing,
        s.pair.q_box, eps_min);
    r.grid_points = pair.k_grid.size();

    std::vector<std::pair<int, long long>> s_by_n;
    clock.time("separated_sweep", [&] {
      for (int n = s.n_min; n <= s.n_max; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        SeparatedResult res = separated_set(sys, pair.k_grid, n, eps_min);
        auto t1 = std::chrono::steady_clock::now();
        SweepCell cell;
        cell.eps = eps_min;
        cell.n = n;
        cell.r_inv = res.s_n;
        cell.evaluations = static_cast<long long>(pair.k_grid.size());
        cell.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        r.separated_cells.push_back(cell);
        s_by_n.emplace_back(n, res.s_n);
        if (n == s.n_max) {
          r.separated_spanning_failures =
              count_spanning_failures(sys, pair.k_grid, res);
        }
      }
    });
    r.separated_fit = h_inv_estimate(s_by_n, lb);
    r.estimate_slope = r.separated_fit->slope;

    inputs.estimate_slope = r.estimate_slope;
    inputs.lower_slope = inputs.bowen_upper;  // equality surrogate
  }

  r.verdict = theorem_check(inputs);
  return r;
}

namespace {

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  written.push_back(path);
}

}  // namespace

std::vector<std::string> emit_report(const RunReport& r,
                                     const std::string& out_dir,
                                     const EmitOptions& opts) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  const bool separated = !r.separated_cells.empty();
  const std::string kind = separated ? "s_n" : "r_inv";

  // summary.txt
  {
    std::string t;
    t += "name: " + r.name + "\n";
    t += "preset: " + r.preset + "\n";
    t += "version: " + std::string(r.version) + "\n";
    t += "config_hash: " + std::to_string(r.config_hash) + "\n";
    t += "eigenvalues:";
    for (const auto& ev : r.eigenvalues) {
      t += " (" + fmt(ev.real()) + (ev.imag() < 0 ? "-" : "+") +
           fmt(std::abs(ev.imag())) + "i)";
    }
    t += "\n";
    t += "dim_plus: " + std::to_string(r.dim_plus) + "\n";
    t += "dim_zero: " + std::to_string(r.dim_zero) + "\n";
    t += "dim_minus: " + std::to_string(r.dim_minus) + "\n";
    t += "bowen_bits: " + fmt(r.bowen_bits) + "\n";
    t += "bowen_nats: " + fmt(r.bowen_nats) + "\n";
    t += "log_base_note: base-2 is the declared convention; the natural-log "
         "value is co-reported because the two conventions disagree in the "
         "literature values\n";
    if (r.growth.nontrivial) {
      t += "growth_c: " + fmt(r.growth.c) + "\n";
      t += "growth_sigma: " + fmt(r.growth.sigma) + "\n";
    } else {
      t += "growth_bounds: empty (g+ and g- trivial)\n";
    }
    t += "bracket_worst_residual: " + fmt(r.bracket.worst_residual) +
         (r.bracket.pass ? " (pass)\n" : " (FAIL)\n");
    t += "trace_ad_worst: " + fmt(r.trace_ad.worst_trace) +
         (r.trace_ad.pass ? " (pass)\n" : " (FAIL)\n");
    t += "closedness: " + r.closedness.reason + "\n";
    t += "quotient: " + (r.quotient_enabled ? std::string("enabled") : r.quotient_note) + "\n";
    if (r.measure_bound) {
      t += "measure_mu_k: " + fmt(r.measure_bound->mu_k) + "\n";
      t += "measure_mu_q_eps: " + fmt(r.measure_bound->mu_q_eps) + "\n";
      t += "measure_det: " + fmt(r.measure_bound->det_complement) + "\n";
      t += "measure_bound_slope: " + fmt(r.measure_bound->slope) + "\n";
    }
    t += "grid_points: " + std::to_string(r.grid_points) + "\n";
    if (r.certified) {
      t += "admissibility: certified (" +
           std::to_string(r.certificate_evaluations) + " evaluations)\n";
    }
    if (separated) {
      t += "separated_spanning_failures: " +
           std::to_string(r.separated_spanning_failures) + "\n";
    }
    if (r.witness) {
      t += "density_witness: " +
           std::string(r.witness->complete() ? "complete" : "incomplete") +
           ", missed " + std::to_string(r.witness->missed.size()) + " of " +
           std::to_string(r.witness->grid_per_side * r.witness->grid_per_side) +
           " targets\n";
    }
    t += "estimate_slope: " + fmt(r.estimate_slope) + "\n";
    t += "verdict: " + std::string(r.verdict.pass ? "PASS" : "FAIL") + " (" +
         r.verdict.detail + ")\n";
    t += "verdict_upper: " + fmt(r.verdict.upper) + "\n";
    if (r.verdict.lower) t += "verdict_lower: " + fmt(*r.verdict.lower) + "\n";
    t += "verdict_upper_margin: " + fmt(r.verdict.upper_margin) + "\n";
    if (r.verdict.lower) {
      t += "verdict_lower_margin: " + fmt(r.verdict.lower_margin) + "\n";
    }
    if (opts.include_timings) {
      for (const auto& st : r.timings) {
        t += "timing_" + st.stage + "_ms: " + fmt(st.ms) + "\n";
      }
    }
    t += "--- config ---\n" + r.canonical_config;
    write_file(out_dir + "/summary.txt", t, written);
  }

  // table.tsv: one row per (n, eps) cell.
  {
    std::string t =
        "preset\tn\teps\tdelta\trho\tmethod\tkind\tcount\tevaluations\tbound_log2";
    if (opts.include_timings) t += "\twall_ms";
    t += "\n";
    const auto& cells = separated ? r.separated_cells : r.sweep.cells;
    for (const auto& c : cells) {
      t += r.preset + "\t" + std::to_string(c.n) + "\t" + fmt(c.eps) + "\t" +
           fmt(r.delta) + "\t" + fmt(r.rho) + "\t" +
           (c.method == CoverMethod::greedy ? "greedy" : "exact") + "\t" +
           kind + "\t" + std::to_string(c.r_inv) + "\t" +
           std::to_string(c.evaluations) + "\t";
      if (r.measure_bound && !separated) {
        t += fmt(r.measure_bound->log_value_at(c.n, 2.0));
      } else {
        t += "-";
      }
      if (opts.include_timings) t += "\t" + fmt(c.wall_ms);
      t += "\n";
    }
    write_file(out_dir + "/table.tsv", t, written);
  }

  // fit_table.tsv
  {
    std::string t = "eps\tslope\tstderr\tci95\tlimsup\tpoints\n";
    auto put = [&](double eps, const EntropyFit& f) {
      t += fmt(eps) + "\t" + fmt(f.slope) + "\t" + fmt(f.stderr_slope) + "\t" +
           fmt(f.ci95) + "\t" + fmt(f.limsup_surrogate) + "\t" +
           std::to_string(f.points) + "\n";
    };
    if (separated) {
      if (r.separated_fit) {
        put(r.separated_cells.front().eps, *r.separated_fit);
      }
    } else {
      for (const auto& [eps, f] : r.sweep.fits) put(eps, f);
    }
    write_file(out_dir + "/fit_table.tsv", t, written);
  }

  // plot-ready two-column data, one file per eps.
  {
    const auto& cells = separated ? r.separated_cells : r.sweep.cells;
    std::vector<double> eps_seen;
    for (const auto& c : cells) {
      if (std::find(eps_seen.begin(), eps_seen.end(), c.eps) == eps_seen.end()) {
        eps_seen.push_back(c.eps);
      }
    }
    for (size_t i = 0; i < eps_seen.size(); ++i) {
      std::string t;
      for (const auto& c : cells) {
        if (c.eps != eps_seen[i]) continue;
        t += std::to_string(c.n) + "\t" +
             fmt(std::log2(static_cast<double>(c.r_inv))) + "\n";
      }
      write_file(out_dir + "/plot_eps" + std::to_string(i) + ".dat", t, written);
    }
  }
  return written;
}

}  // namespace lgent
