#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "lgent/runner.hpp"

namespace {

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& mode, const std::string& log_base,
            long long seed, long long budget, bool timings) {
  lgent::Scenario s = lgent::load_scenario_file(scenario_path);
  if (!mode.empty()) {
    if (mode == "greedy") s.mode = lgent::CoverMethod::greedy;
    else if (mode == "exact") s.mode = lgent::CoverMethod::exact;
    else throw lgent::ConfigError("--mode expects greedy or exact");
  }
  if (!log_base.empty()) {
    if (log_base == "2") s.log_base = 2.0;
    else if (log_base == "e") s.log_base = std::exp(1.0);
    else throw lgent::ConfigError("--log-base expects 2 or e");
  }
  if (seed >= 0) s.seed = static_cast<unsigned long long>(seed);
  if (budget > 0) s.budget = budget;
  lgent::validate_scenario(s);

  lgent::RunReport report = lgent::run_scenario(s);
  lgent::EmitOptions opts;
  opts.include_timings = timings;
  std::vector<std::string> files = lgent::emit_report(report, out_dir, opts);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  std::cout << "estimate_slope " << report.estimate_slope << "\n";
  std::cout << "verdict " << (report.verdict.pass ? "PASS" : "FAIL") << " ("
            << report.verdict.detail << ")\n";
  return report.verdict.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariance-entropy experiments for discrete-time linear "
               "systems on Lie groups"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", mode, log_base;
  long long seed = -1, budget = 0;
  bool timings = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--mode", mode, "greedy|exact");
  run->add_option("--log-base", log_base, "2|e");
  run->add_option("--seed", seed, "RNG seed override");
  run->add_option("--budget", budget, "evaluation budget override");
  run->add_flag("--timings", timings, "include wall times in outputs");

  CLI::App* presets = app.add_subcommand("presets", "inspect built-in presets");
  CLI::App* presets_list = presets->add_subcommand("list", "list preset names");
  std::string preset_name;
  CLI::App* presets_show =
      presets->add_subcommand("show", "print a preset as a scenario file");
  presets_show->add_option("name", preset_name, "preset name")->required();
  presets->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario_path, out_dir, mode, log_base, seed, budget, timings);
    }
    if (presets_list->parsed()) {
      for (const auto& n : lgent::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (presets_show->parsed()) {
      std::cout << lgent::canonical_dump(lgent::make_preset_scenario(preset_name));
      return 0;
    }
  } catch (const lgent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lgent::BudgetExceeded& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const lgent::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
