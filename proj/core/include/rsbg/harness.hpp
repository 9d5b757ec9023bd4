#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsbg/config.hpp"
#include "rsbg/environment.hpp"

namespace rsbg {

// Outcome of one seeded episode.
struct TrialRecord {
  std::string planner;
  int trial = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kRunning;
  int steps = 0;  // episode length; steps to goal when outcome is success
  std::vector<double> belief_std;       // normalized belief std per step
  std::uint64_t scenario_digest = 0;    // initial world + true behavior draw
  double wall_ms = 0.0;                 // total planning time (timing file)
  std::vector<double> step_wall_ms;     // per-step planning time (timing file)
};

struct PlannerSummary {
  std::string planner;
  int trials = 0;
  double success_pct = 0.0;
  double collision_pct = 0.0;
  double timeout_pct = 0.0;
  std::optional<double> mean_steps_to_goal;  // absent without successes
  std::vector<double> belief_std_curve;  // mean over the first configured
                                         // trials, per step
  double mean_plan_ms = 0.0;  // timing file only
  double p50_plan_ms = 0.0;
  double p95_plan_ms = 0.0;
};

struct MetricsSummary {
  std::vector<PlannerSummary> planners;
};

// Deterministic aggregation of trial records, planner order preserved.
MetricsSummary summarize(std::span<const TrialRecord> records,
                         const MetricOptions& metrics);

// Per-step structured trace of one trial (verbosity option).
struct StepTrace {
  int step = 0;
  int ego_action = 0;
  std::string ego_label;
  std::vector<double> other_actions;
  std::vector<double> positions;  // per agent, ego first
  double ego_progress = 0.0;      // lane-change domain only
  std::vector<std::vector<double>> beliefs;  // posterior per other agent
  double belief_std = 0.0;
  std::vector<double> root_values;
  std::vector<int> root_visits;
  double reward = 0.0;
  Outcome outcome = Outcome::kRunning;
};

struct TrialTrace {
  std::string planner;
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<StepTrace> steps;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;  // ordered by (planner index, trial)
  MetricsSummary summary;
  std::vector<TrialTrace> traces;  // filled when metrics.trace is set
};

// Derivation of the per-trial seed from the experiment master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

// Runs trials x planners on a worker pool (RSBG_WORKERS overrides the
// size). Per trial index, every planner sees identical scenario draws, true
// behavior draws and per-step behavior-state draws.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Re-runs a single (planner, trial) pair with tracing on.
TrialTrace replay_trial(const ExperimentConfig& cfg,
                        const std::string& planner_name, int trial);

// Writes results.json, trials.csv, belief_std.csv, summary.csv (all
// deterministic) plus timing.json (wall times, machine-dependent) into dir.
void write_results(const ExperimentResult& result, const std::string& dir);

std::string trace_to_json(const TrialTrace& trace);

}  // namespace rsbg
