#include "rsbg/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "rsbg/search.hpp"

namespace rsbg {

using nlohmann::ordered_json;

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  return derive_seed(master_seed, "trial", static_cast<std::uint64_t>(trial));
}

namespace {

std::uint64_t hash_doubles(std::uint64_t h, std::span<const double> values) {
  for (double v : values) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

// Guards the degenerate case where a drawn interval has zero width (the
// behavior-space type requires lower < upper).
BehaviorSpace interval_cell(const std::string& name, double lower,
                            double upper, const std::string& unit) {
  if (!(lower < upper)) {
    upper = lower + std::max(1e-9, std::abs(lower) * 1e-12);
  }
  return make_interval_space(name, lower, upper, unit);
}

// ---------------------------------------------------------------------------
// Domain hooks for the generic trial loop.

struct CrossingDomain {
  const ExperimentConfig& cfg;
  std::shared_ptr<const CrossingGapPolicy> policy =
      std::make_shared<CrossingGapPolicy>();

  using Env = CrossingEnv;
  using Truth = TrueBehaviorDraw;

  Env make_env(Rng& /*scenario_rng*/) const {
    // The initial crossing state is fixed by the parameters.
    return CrossingEnv(cfg.crossing.params);
  }

  Truth sample_truth(Rng& rng) const {
    return draw_true_behaviors(crossing_true_space(cfg.crossing.variant),
                               cfg.crossing.params.n_agents - 1, rng);
  }

  HypothesisSets hypotheses(const PlannerSpec& spec, const Truth& truth) const {
    const int n_others = cfg.crossing.params.n_agents - 1;
    if (full_info_hypotheses(spec.search.mode)) {
      HypothesisSets sets;
      for (int j = 0; j < n_others; ++j) {
        const Interval& iv = truth.intervals[j];
        sets.push_back({Hypothesis{
            interval_cell("desired_gap", iv.lower, iv.upper, "chain units"),
            policy, 1}});
      }
      return sets;
    }
    const int k = partitioned_hypotheses(spec.search.mode) ? spec.k : 1;
    const std::vector<int> cells{k};
    return shared_hypothesis_sets(
        partition_equal(expert_full_space(), cells).hypotheses(policy),
        n_others);
  }

  std::vector<double> others_actions(const Env& env, const Truth& truth,
                                     Rng& rng) const {
    return simulate_others(env, truth, rng);
  }

  std::uint64_t truth_digest(const Truth& truth) const {
    std::uint64_t h = 0x7c1;
    for (const Interval& iv : truth.intervals) {
      h = hash_doubles(h, std::array{iv.lower, iv.upper});
    }
    return h;
  }

  std::vector<double> positions(const Env& env) const {
    return env.state().positions;
  }
  double ego_progress(const Env& /*env*/) const { return 0.0; }
};

struct LaneChangeDomain {
  const ExperimentConfig& cfg;

  using Env = LaneChangeEnv;
  using Truth = std::vector<BehaviorSpace>;

  Env make_env(Rng& rng) const {
    return LaneChangeEnv::sample_scenario(cfg.lane_change.params, rng);
  }

  Truth sample_truth(Rng& rng) const {
    return draw_true_behaviors_5d(cfg.lane_change.params,
                                  cfg.lane_change.delta_min,
                                  cfg.lane_change.delta_max, rng);
  }

  HypothesisSets hypotheses(const PlannerSpec& spec, const Truth& truth) const {
    const auto& params = cfg.lane_change.params;
    const DriverParams pinned = params.ranges.center(params.coolness);
    if (full_info_hypotheses(spec.search.mode)) {
      HypothesisSets sets;
      for (const BehaviorSpace& box : truth) {
        std::vector<std::string> names;
        for (const auto& d : box.dims()) names.push_back(d.name);
        sets.push_back({Hypothesis{
            box, std::make_shared<LaneAccPolicy>(names, pinned), 1}});
      }
      return sets;
    }
    const BehaviorSpace space =
        lane_hypothesis_space(spec.lane_space, params.ranges);
    std::vector<std::string> names;
    for (const auto& d : space.dims()) names.push_back(d.name);
    const auto policy = std::make_shared<LaneAccPolicy>(names, pinned);
    const int per_dim = partitioned_hypotheses(spec.search.mode) ? spec.k : 1;
    const std::vector<int> cells(space.dim(), per_dim);
    return shared_hypothesis_sets(
        partition_equal(space, cells).hypotheses(policy), params.n_others);
  }

  std::vector<double> others_actions(const Env& env, const Truth& truth,
                                     Rng& rng) const {
    return simulate_others(env, truth, rng);
  }

  std::uint64_t truth_digest(const Truth& truth) const {
    std::uint64_t h = 0x7c2;
    for (const BehaviorSpace& box : truth) {
      for (const auto& d : box.dims()) {
        h = hash_doubles(h, std::array{d.lower, d.upper});
      }
    }
    return h;
  }

  std::vector<double> positions(const Env& env) const {
    std::vector<double> out{env.state().ego.s};
    for (const auto& o : env.state().others) out.push_back(o.s);
    return out;
  }
  double ego_progress(const Env& env) const { return env.state().ego_progress; }
};

template <class Domain>
TrialRecord run_trial(const Domain& domain, const ExperimentConfig& cfg,
                      const PlannerSpec& spec, int trial, TrialTrace* trace) {
  const std::uint64_t seed = trial_seed(cfg.master_seed, trial);
  Rng scenario_rng(derive_seed(seed, "scenario"));
  Rng truth_rng(derive_seed(seed, "truth"));

  typename Domain::Env env = domain.make_env(scenario_rng);
  const typename Domain::Truth truth = domain.sample_truth(truth_rng);
  const HypothesisSets hyps = domain.hypotheses(spec, truth);
  const int n_others = env.other_count();
  const int k = static_cast<int>(hyps.front().size());

  BeliefUpdateConfig belief_cfg = cfg.belief;
  belief_cfg.tolerance = cfg.resolved_tolerance();
  BeliefState belief = BeliefState::init(n_others, k);

  TrialRecord record;
  record.planner = spec.name;
  record.trial = trial;
  record.seed = seed;
  record.scenario_digest =
      mix64(env.state_key() ^ domain.truth_digest(truth));

  if (trace != nullptr) {
    trace->planner = spec.name;
    trace->trial = trial;
    trace->seed = seed;
  }

  std::unique_ptr<Environment> prev_env;
  std::vector<double> prev_actions;

  for (int step = 0;; ++step) {
    if (step > 0) {
      Rng belief_rng(derive_seed(seed, "belief", step));
      for (int j = 1; j <= n_others; ++j) {
        belief = update(std::move(belief), j - 1, prev_actions[j - 1],
                        prev_env->history(), hyps[j - 1], belief_cfg,
                        belief_rng);
      }
      record.belief_std.push_back(normalized_belief_std(belief));
    }

    Rng search_rng(derive_seed(seed, "search", step));
    const SearchResult result =
        plan(env, belief, hyps, spec.search, search_rng);
    record.wall_ms += result.wall_time_ms;
    record.step_wall_ms.push_back(result.wall_time_ms);

    Rng sim_rng(derive_seed(seed, "sim", step));
    const std::vector<double> others =
        domain.others_actions(env, truth, sim_rng);

    prev_env = env.clone();
    prev_actions = others;
    const StepResult sr = env.step(result.action, others);

    if (trace != nullptr) {
      StepTrace st;
      st.step = step;
      st.ego_action = result.action;
      st.ego_label = env.ego_action_label(result.action);
      st.other_actions = others;
      st.positions = domain.positions(env);
      st.ego_progress = domain.ego_progress(env);
      for (int j = 0; j < n_others; ++j) {
        const auto post = belief.posterior(j);
        st.beliefs.emplace_back(post.begin(), post.end());
      }
      st.belief_std = normalized_belief_std(belief);
      st.root_values = result.root_values;
      st.root_visits = result.root_visits;
      st.reward = sr.ego_reward;
      st.outcome = sr.outcome;
      trace->steps.push_back(std::move(st));
    }

    if (sr.terminal) {
      record.outcome = sr.outcome;
      record.steps = step + 1;
      break;
    }
  }
  return record;
}

TrialRecord dispatch_trial(const ExperimentConfig& cfg,
                           const PlannerSpec& spec, int trial,
                           TrialTrace* trace) {
  if (cfg.domain == DomainKind::kCrossing) {
    return run_trial(CrossingDomain{cfg}, cfg, spec, trial, trace);
  }
  return run_trial(LaneChangeDomain{cfg}, cfg, spec, trial, trace);
}

int worker_count(int tasks) {
  if (const char* env = std::getenv("RSBG_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, tasks);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(hw == 0 ? 1 : static_cast<int>(hw), tasks));
}

}  // namespace

MetricsSummary summarize(std::span<const TrialRecord> records,
                         const MetricOptions& metrics) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: no records");
  }
  MetricsSummary summary;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.planner) == order.end()) {
      order.push_back(r.planner);
    }
  }
  for (const auto& name : order) {
    PlannerSummary ps;
    ps.planner = name;
    int successes = 0, collisions = 0, timeouts = 0;
    double step_sum = 0.0;
    std::vector<double> plan_times;
    std::vector<double> curve_sum(metrics.belief_std_steps, 0.0);
    std::vector<int> curve_count(metrics.belief_std_steps, 0);
    int curve_trials = 0;
    for (const auto& r : records) {
      if (r.planner != name) continue;
      ++ps.trials;
      switch (r.outcome) {
        case Outcome::kSuccess:
          ++successes;
          step_sum += r.steps;
          break;
        case Outcome::kCollision: ++collisions; break;
        case Outcome::kTimeout: ++timeouts; break;
        case Outcome::kRunning: break;
      }
      plan_times.insert(plan_times.end(), r.step_wall_ms.begin(),
                        r.step_wall_ms.end());
      if (curve_trials < metrics.belief_std_trials) {
        ++curve_trials;
        const int n = std::min<int>(metrics.belief_std_steps,
                                    static_cast<int>(r.belief_std.size()));
        for (int s = 0; s < n; ++s) {
          curve_sum[s] += r.belief_std[s];
          ++curve_count[s];
        }
      }
    }
    ps.success_pct = 100.0 * successes / ps.trials;
    ps.collision_pct = 100.0 * collisions / ps.trials;
    ps.timeout_pct = 100.0 * timeouts / ps.trials;
    if (successes > 0) ps.mean_steps_to_goal = step_sum / successes;
    for (int s = 0; s < metrics.belief_std_steps; ++s) {
      if (curve_count[s] > 0) {
        ps.belief_std_curve.push_back(curve_sum[s] / curve_count[s]);
      }
    }
    if (!plan_times.empty()) {
      double total = 0.0;
      for (double t : plan_times) total += t;
      ps.mean_plan_ms = total / plan_times.size();
      std::sort(plan_times.begin(), plan_times.end());
      auto rank = [&](double q) {
        const std::size_t i = static_cast<std::size_t>(
            q * static_cast<double>(plan_times.size() - 1));
        return plan_times[i];
      };
      ps.p50_plan_ms = rank(0.5);
      ps.p95_plan_ms = rank(0.95);
    }
    summary.planners.push_back(std::move(ps));
  }
  return summary;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;

  const int n_planners = static_cast<int>(cfg.planners.size());
  const int n_tasks = n_planners * cfg.trials;
  result.records.resize(n_tasks);
  if (cfg.metrics.trace) result.traces.resize(n_tasks);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  auto work = [&]() {
    while (true) {
      const int task = next.fetch_add(1);
      if (task >= n_tasks || failed.load()) return;
      const int planner = task / cfg.trials;
      const int trial = task % cfg.trials;
      try {
        TrialTrace* trace =
            cfg.metrics.trace ? &result.traces[task] : nullptr;
        result.records[task] =
            dispatch_trial(cfg, cfg.planners[planner], trial, trace);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        if (error_message.empty()) error_message = e.what();
        return;
      }
    }
  };

  const int workers = worker_count(n_tasks);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) {
    throw std::runtime_error("trial failed: " + error_message);
  }

  result.summary = summarize(result.records, cfg.metrics);
  return result;
}

TrialTrace replay_trial(const ExperimentConfig& cfg,
                        const std::string& planner_name, int trial) {
  cfg.validate();
  if (trial < 0 || trial >= cfg.trials) {
    throw std::invalid_argument("replay: trial index out of range");
  }
  for (const auto& spec : cfg.planners) {
    if (spec.name == planner_name) {
      TrialTrace trace;
      dispatch_trial(cfg, spec, trial, &trace);
      return trace;
    }
  }
  throw std::invalid_argument("replay: unknown planner name: " + planner_name);
}

namespace {

ordered_json record_to_json(const TrialRecord& r) {
  // Wall times stay out: result files must be byte-stable across runs.
  ordered_json j;
  j["planner"] = r.planner;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["outcome"] = to_string(r.outcome);
  j["steps"] = r.steps;
  j["scenario_digest"] = r.scenario_digest;
  j["belief_std"] = r.belief_std;
  return j;
}

ordered_json summary_to_json(const MetricsSummary& summary) {
  ordered_json arr = ordered_json::array();
  for (const auto& ps : summary.planners) {
    ordered_json j;
    j["planner"] = ps.planner;
    j["trials"] = ps.trials;
    j["success_pct"] = ps.success_pct;
    j["collision_pct"] = ps.collision_pct;
    j["timeout_pct"] = ps.timeout_pct;
    if (ps.mean_steps_to_goal.has_value()) {
      j["mean_steps_to_goal"] = *ps.mean_steps_to_goal;
    } else {
      j["mean_steps_to_goal"] = nullptr;
    }
    j["belief_std_curve"] = ps.belief_std_curve;
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_results(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  ordered_json root;
  root["config"] =
      ordered_json::parse(experiment_config_to_json(result.config));
  root["records"] = ordered_json::array();
  for (const auto& r : result.records) {
    root["records"].push_back(record_to_json(r));
  }
  root["summary"] = summary_to_json(result.summary);
  write_file(base / "results.json", root.dump(2) + "\n");

  std::string trials_csv = "planner,trial,seed,outcome,steps,scenario_digest\n";
  for (const auto& r : result.records) {
    trials_csv += r.planner + "," + std::to_string(r.trial) + "," +
                  std::to_string(r.seed) + "," + to_string(r.outcome) + "," +
                  std::to_string(r.steps) + "," +
                  std::to_string(r.scenario_digest) + "\n";
  }
  write_file(base / "trials.csv", trials_csv);

  std::string belief_csv = "planner,trial,step,normalized_belief_std\n";
  for (const auto& r : result.records) {
    for (std::size_t s = 0; s < r.belief_std.size(); ++s) {
      belief_csv += r.planner + "," + std::to_string(r.trial) + "," +
                    std::to_string(s + 1) + "," + fmt_double(r.belief_std[s]) +
                    "\n";
    }
  }
  write_file(base / "belief_std.csv", belief_csv);

  std::string summary_csv =
      "planner,trials,success_pct,collision_pct,timeout_pct,"
      "mean_steps_to_goal\n";
  for (const auto& ps : result.summary.planners) {
    summary_csv += ps.planner + "," + std::to_string(ps.trials) + "," +
                   fmt_double(ps.success_pct) + "," +
                   fmt_double(ps.collision_pct) + "," +
                   fmt_double(ps.timeout_pct) + "," +
                   (ps.mean_steps_to_goal.has_value()
                        ? fmt_double(*ps.mean_steps_to_goal)
                        : std::string()) +
                   "\n";
  }
  write_file(base / "summary.csv", summary_csv);

  ordered_json timing;
  timing["planners"] = ordered_json::array();
  for (const auto& ps : result.summary.planners) {
    timing["planners"].push_back({{"planner", ps.planner},
                                  {"mean_plan_ms", ps.mean_plan_ms},
                                  {"p50_plan_ms", ps.p50_plan_ms},
                                  {"p95_plan_ms", ps.p95_plan_ms}});
  }
  timing["trials"] = ordered_json::array();
  for (const auto& r : result.records) {
    timing["trials"].push_back({{"planner", r.planner},
                                {"trial", r.trial},
                                {"wall_ms", r.wall_ms}});
  }
  write_file(base / "timing.json", timing.dump(2) + "\n");

  if (result.config.metrics.trace) {
    const fs::path traces = base / "traces";
    fs::create_directories(traces);
    for (const auto& trace : result.traces) {
      const std::string name =
          trace.planner + "_trial" + std::to_string(trace.trial) + ".json";
      write_file(traces / name, trace_to_json(trace));
    }
  }
}

std::string trace_to_json(const TrialTrace& trace) {
  ordered_json j;
  j["planner"] = trace.planner;
  j["trial"] = trace.trial;
  j["seed"] = trace.seed;
  j["steps"] = ordered_json::array();
  for (const auto& st : trace.steps) {
    ordered_json s;
    s["step"] = st.step;
    s["ego_action"] = st.ego_action;
    s["ego_label"] = st.ego_label;
    s["other_actions"] = st.other_actions;
    s["positions"] = st.positions;
    s["ego_progress"] = st.ego_progress;
    s["beliefs"] = st.beliefs;
    s["belief_std"] = st.belief_std;
    ordered_json values = ordered_json::array();
    for (double v : st.root_values) {
      if (std::isnan(v)) {
        values.push_back(nullptr);
      } else {
        values.push_back(v);
      }
    }
    s["root_values"] = std::move(values);
    s["root_visits"] = st.root_visits;
    s["reward"] = st.reward;
    s["outcome"] = to_string(st.outcome);
    j["steps"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

}  // namespace rsbg
