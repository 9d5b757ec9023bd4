// Command line front end: seeded batch experiments, parameter sweeps, the
// sample-complexity calculator, and single-trial replays with a full trace.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsbg/complexity.hpp"
#include "rsbg/harness.hpp"

namespace {

void print_summary(const rsbg::MetricsSummary& summary) {
  for (const auto& ps : summary.planners) {
    std::printf(
        "%-20s success %6.1f%%  collision %6.1f%%  timeout %6.1f%%",
        ps.planner.c_str(), ps.success_pct, ps.collision_pct, ps.timeout_pct);
    if (ps.mean_steps_to_goal.has_value()) {
      std::printf("  steps-to-goal %6.2f", *ps.mean_steps_to_goal);
    }
    std::printf("  plan %7.2f ms/step\n", ps.mean_plan_ms);
  }
}

int cmd_run(const std::string& config_path, int trials_override,
            long long seed_override, const std::string& output_override,
            bool trace) {
  rsbg::ExperimentConfig cfg = rsbg::load_experiment_config(config_path);
  if (trials_override > 0) cfg.trials = trials_override;
  if (seed_override >= 0) {
    cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  }
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (trace) cfg.metrics.trace = true;
  cfg.validate();

  const rsbg::ExperimentResult result = rsbg::run_experiment(cfg);
  rsbg::write_results(result, cfg.output_dir);
  print_summary(result.summary);
  std::printf("results written to %s\n", cfg.output_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<int>& values, int trials_override,
              const std::string& output_override) {
  rsbg::ExperimentConfig base = rsbg::load_experiment_config(config_path);
  if (trials_override > 0) base.trials = trials_override;
  if (!output_override.empty()) base.output_dir = output_override;
  if (param != "k" && param != "iterations") {
    std::fprintf(stderr, "sweep: --param must be 'k' or 'iterations'\n");
    return 1;
  }
  if (values.empty()) {
    std::fprintf(stderr, "sweep: --values must not be empty\n");
    return 1;
  }

  std::string sweep_csv =
      "param,value,planner,trials,success_pct,collision_pct,timeout_pct,"
      "mean_steps_to_goal\n";
  for (int value : values) {
    rsbg::ExperimentConfig cfg = base;
    for (auto& spec : cfg.planners) {
      if (param == "iterations") {
        spec.search.iterations = value;
      } else if (rsbg::partitioned_hypotheses(spec.search.mode)) {
        spec.k = value;  // single-hypothesis baselines keep K = 1
      }
    }
    cfg.output_dir = base.output_dir + "/" + param + "_" +
                     std::to_string(value);
    cfg.validate();
    std::printf("== %s = %d ==\n", param.c_str(), value);
    const rsbg::ExperimentResult result = rsbg::run_experiment(cfg);
    rsbg::write_results(result, cfg.output_dir);
    print_summary(result.summary);
    for (const auto& ps : result.summary.planners) {
      char line[256];
      std::snprintf(line, sizeof(line), "%s,%d,%s,%d,%.17g,%.17g,%.17g,%s\n",
                    param.c_str(), value, ps.planner.c_str(), ps.trials,
                    ps.success_pct, ps.collision_pct, ps.timeout_pct,
                    ps.mean_steps_to_goal.has_value()
                        ? std::to_string(*ps.mean_steps_to_goal).c_str()
                        : "");
      sweep_csv += line;
    }
  }
  std::filesystem::create_directories(base.output_dir);
  std::ofstream out(base.output_dir + "/sweep_summary.csv", std::ios::binary);
  out << sweep_csv;
  std::printf("sweep summary written to %s/sweep_summary.csv\n",
              base.output_dir.c_str());
  return 0;
}

int cmd_complexity(int agents, int horizon, int k,
                   const std::string& behavior_samples) {
  const rsbg::ComplexityReport r =
      rsbg::complexity_ratio(k, agents, horizon);
  std::printf("N = %d agents, horizon t = %d, K = %d\n", agents, horizon, k);
  std::printf("O_SBG  = %s\n",
              rsbg::to_string(r.sbg, k, behavior_samples).c_str());
  std::printf("O_RSBG = %s\n",
              rsbg::to_string(r.rsbg, k, behavior_samples).c_str());
  std::printf("exact O_SBG/O_RSBG = %s\n",
              rsbg::to_string(r.exact_ratio, k, behavior_samples).c_str());
  std::printf("ratio = %s (exponent %lld)\n",
              rsbg::ratio_string(r, behavior_samples).c_str(),
              r.ratio_exponent);
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& planner,
               int trial, long long seed_override, std::string out_path) {
  rsbg::ExperimentConfig cfg = rsbg::load_experiment_config(config_path);
  if (seed_override >= 0) {
    cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  }
  const rsbg::TrialTrace trace = rsbg::replay_trial(cfg, planner, trial);
  if (out_path.empty()) {
    out_path = planner + "_trial" + std::to_string(trial) + ".json";
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
    return 1;
  }
  out << rsbg::trace_to_json(trace);
  std::printf("trace written to %s (%zu steps, outcome %s)\n",
              out_path.c_str(), trace.steps.size(),
              trace.steps.empty()
                  ? "?"
                  : rsbg::to_string(trace.steps.back().outcome));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-space hypothesis planning benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  int trials_override = 0;
  long long seed_override = -1;
  std::string output_override;
  bool trace = false;

  auto* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("--config", config_path, "experiment config JSON")
      ->required();
  run->add_option("--trials", trials_override, "override trial count");
  run->add_option("--seed", seed_override, "override master seed");
  run->add_option("--output", output_override, "override output directory");
  run->add_flag("--trace", trace, "dump per-step traces");

  std::string sweep_param;
  std::vector<int> sweep_values;
  auto* sweep = app.add_subcommand(
      "sweep", "Vary k or iterations over a list, one summary per point");
  sweep->add_option("--config", config_path, "experiment config JSON")
      ->required();
  sweep->add_option("--param", sweep_param, "'k' or 'iterations'")->required();
  sweep->add_option("--values", sweep_values, "list of values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--trials", trials_override, "override trial count");
  sweep->add_option("--output", output_override, "override output directory");

  int agents = 9;
  int horizon = 20;
  int k = 16;
  std::string behavior_samples = "|B|";
  auto* complexity = app.add_subcommand(
      "complexity", "Print search sample-complexity exponents and ratio");
  complexity->add_option("--agents", agents, "agent count N")->required();
  complexity->add_option("--horizon", horizon, "prediction horizon t")
      ->required();
  complexity->add_option("--k", k, "hypothesis count K");
  complexity->add_option("--behavior-samples", behavior_samples,
                         "symbol or value for the behavior-space sample size");

  std::string planner;
  int trial = 0;
  std::string out_path;
  auto* replay = app.add_subcommand(
      "replay", "Re-run one trial by seed with a full trace dump");
  replay->add_option("--config", config_path, "experiment config JSON")
      ->required();
  replay->add_option("--planner", planner, "planner name from the config")
      ->required();
  replay->add_option("--trial", trial, "trial index")->required();
  replay->add_option("--seed", seed_override, "override master seed");
  replay->add_option("--out", out_path, "trace output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, trials_override, seed_override,
                     output_override, trace);
    }
    if (sweep->parsed()) {
      return cmd_sweep(config_path, sweep_param, sweep_values, trials_override,
                       output_override);
    }
    if (complexity->parsed()) {
      return cmd_complexity(agents, horizon, k, behavior_samples);
    }
    if (replay->parsed()) {
      return cmd_replay(config_path, planner, trial, seed_override, out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
