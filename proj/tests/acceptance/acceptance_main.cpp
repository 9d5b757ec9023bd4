// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Experiments run at desk scale with pinned seeds; absolute success
// percentages of the full-scale study are out of scope by design, the
// checks here are exact where a number is printed and ordinal otherwise.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rsbg/complexity.hpp"
#include "rsbg/harness.hpp"
#include "support/test_envs.hpp"

using namespace rsbg;
using rsbg::testing::JointHistory;
using rsbg::testing::MatrixGameEnv;
using rsbg::testing::OpponentIndexPolicy;
using rsbg::testing::StageGame;
using rsbg::testing::game_root_action;
using rsbg::testing::game_value;

namespace {

int g_failures = 0;
int g_flags = 0;

void report(int criterion, bool pass, const std::string& detail,
            bool flag_only = false) {
  const char* status = pass ? "PASS" : (flag_only ? "FLAG" : "FAIL");
  std::printf("[%2d] %s  %s\n", criterion, status, detail.c_str());
  if (!pass) {
    if (flag_only) {
      ++g_flags;
    } else {
      ++g_failures;
    }
  }
  std::fflush(stdout);
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v);
  return buf;
}

const PlannerSummary& planner_summary(const MetricsSummary& summary,
                                      const std::string& name) {
  for (const auto& ps : summary.planners) {
    if (ps.planner == name) return ps;
  }
  throw std::runtime_error("missing planner summary: " + name);
}

PlannerSpec crossing_planner(const std::string& name, PlannerMode mode,
                             int k, int iterations) {
  PlannerSpec spec;
  spec.name = name;
  spec.search.mode = mode;
  spec.search.iterations = iterations;
  spec.k = k;
  return spec;
}

ExperimentConfig crossing_config() {
  ExperimentConfig cfg;
  cfg.domain = DomainKind::kCrossing;
  cfg.trials = 100;
  cfg.master_seed = 20240;
  cfg.belief.tolerance = 0.5;
  return cfg;
}

// ---------------------------------------------------------------------------

void criterion_1_complexity() {
  const ComplexityReport r = complexity_ratio(16, 9, 20);
  const bool pass = r.ratio_exponent == 160;
  report(1, pass,
         "complexity ratio exponent for N=9, t=20: " +
             std::to_string(r.ratio_exponent) + " (expected 160, " +
             ratio_string(r) + ")");
}

void criterion_2_oracles() {
  // Two-stage zero-sum games, three actions per agent, pure saddle points
  // per stage so the exhaustive minimax is the target of the per-step
  // worst case.
  StageGame game;
  game.n_ego = 3;
  game.n_opp = 3;
  game.depth = 2;
  game.reward = [](const JointHistory& h, int ego, int opp) {
    if (h.empty()) {
      const double table[3][3] = {{0.6, 0.3, 0.55},
                                  {1.0, 0.0, 0.7},
                                  {0.5, -0.2, 0.1}};
      return table[ego][opp];
    }
    const double table[3][3] = {{0.3, 0.1, 0.2},
                                {0.7, -0.3, 0.4},
                                {0.2, -0.1, -0.4}};
    const auto [a1, b1] = h[0];
    return table[ego][opp] + 0.1 * (a1 - b1);
  };

  MatrixGameEnv env(game);
  const BeliefState belief = BeliefState::init(1, 1);
  const HypothesisSets hyps = shared_hypothesis_sets(
      {Hypothesis{make_interval_space("beta", 0.0, 1.0),
                  std::make_shared<OpponentIndexPolicy>(3), 1}},
      1);

  PlannerConfig cfg;
  cfg.iterations = 50000;
  cfg.ucb_c = 2.0;
  cfg.seed = 11;

  cfg.mode = PlannerMode::kRsbg;
  const SearchResult robust = plan(env, belief, hyps, cfg);
  const double v_minimax = game_value(game, cfg.gamma, true);
  const double robust_err =
      std::abs(robust.root_values[robust.action] - v_minimax);
  const bool robust_action_ok =
      robust.action == game_root_action(game, cfg.gamma, true);

  cfg.mode = PlannerMode::kSbg;
  const SearchResult bayes = plan(env, belief, hyps, cfg);
  const double v_uniform = game_value(game, cfg.gamma, false);
  const double bayes_err =
      std::abs(bayes.root_values[bayes.action] - v_uniform);
  const bool bayes_action_ok =
      bayes.action == game_root_action(game, cfg.gamma, false);

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "tabular oracles at 5e4 iterations: |robust-minimax|=%.3f, "
                "|bayes-uniform|=%.3f (tol 0.05), root actions %s",
                robust_err, bayes_err,
                robust_action_ok && bayes_action_ok ? "match" : "MISMATCH");
  report(2, robust_err < 0.05 && bayes_err < 0.05 && robust_action_ok &&
             bayes_action_ok,
         detail);
}

std::vector<int> trace_actions(const TrialTrace& trace) {
  std::vector<int> actions;
  for (const auto& s : trace.steps) actions.push_back(s.ego_action);
  return actions;
}

void criterion_3_mode_reduction() {
  ExperimentConfig cfg = crossing_config();
  cfg.trials = 10;
  cfg.planners = {crossing_planner("rsbg_k1", PlannerMode::kRsbg, 1, 500),
                  crossing_planner("rmdp", PlannerMode::kRmdp, 1, 500),
                  crossing_planner("sbg_k1", PlannerMode::kSbg, 1, 500),
                  crossing_planner("mdp", PlannerMode::kMdp, 1, 500)};
  bool pass = true;
  for (int trial = 0; trial < cfg.trials && pass; ++trial) {
    pass = pass && trace_actions(replay_trial(cfg, "rsbg_k1", trial)) ==
                       trace_actions(replay_trial(cfg, "rmdp", trial));
    pass = pass && trace_actions(replay_trial(cfg, "sbg_k1", trial)) ==
                       trace_actions(replay_trial(cfg, "mdp", trial));
  }
  report(3, pass,
         std::string("mode reduction over 10 seeded crossing trials: "
                     "RSBG(K=1)==RMDP and SBG(K=1)==MDP action sequences ") +
             (pass ? "identical" : "DIVERGED"));
}

void criteria_4_5_crossing_trends() {
  ExperimentConfig cfg = crossing_config();
  cfg.planners = {
      crossing_planner("rsbg_k16", PlannerMode::kRsbg, 16, 2000),
      crossing_planner("sbg_k16", PlannerMode::kSbg, 16, 2000),
      crossing_planner("rmdp", PlannerMode::kRmdp, 1, 2000),
      crossing_planner("mdp", PlannerMode::kMdp, 1, 2000),
      crossing_planner("sbg_full_info", PlannerMode::kSbgFullInfo, 1, 2000),
  };
  const ExperimentResult result = run_experiment(cfg);
  const auto& rsbg = planner_summary(result.summary, "rsbg_k16");
  const auto& sbg = planner_summary(result.summary, "sbg_k16");
  const auto& rmdp = planner_summary(result.summary, "rmdp");
  const auto& mdp = planner_summary(result.summary, "mdp");
  const auto& sfi = planner_summary(result.summary, "sbg_full_info");

  const int rsbg_collisions =
      static_cast<int>(std::lround(rsbg.collision_pct * cfg.trials / 100.0));
  const bool c4 = rsbg.success_pct >= sbg.success_pct && rsbg_collisions <= 1;
  report(4, c4,
         "crossing desk trend (symmetric, 2000 it, 100 paired trials, K=16): "
         "success RSBG " + pct(rsbg.success_pct) + " >= SBG " +
             pct(sbg.success_pct) + "; RSBG collisions " +
             std::to_string(rsbg_collisions) + " <= 1");

  const bool c5 = rmdp.timeout_pct > rsbg.timeout_pct &&
                  mdp.collision_pct >= rsbg.collision_pct;
  report(5, c5,
         "conservativeness ordering: timeout RMDP " + pct(rmdp.timeout_pct) +
             " > RSBG " + pct(rsbg.timeout_pct) + "; collision MDP " +
             pct(mdp.collision_pct) + " >= RSBG " + pct(rsbg.collision_pct));

  std::printf("     non-gating report: success RSBG %s vs SBGFullInfo %s; "
              "MDP collisions %s (the full-scale study reports equality for "
              "the first pair and a risky MDP; neither is gated at desk "
              "scale)\n",
              pct(rsbg.success_pct).c_str(), pct(sfi.success_pct).c_str(),
              pct(mdp.collision_pct).c_str());
}

void criterion_6_belief_stability() {
  ExperimentConfig cfg = crossing_config();
  cfg.trials = 10;
  cfg.planners = {crossing_planner("rsbg_k16", PlannerMode::kRsbg, 16, 2000),
                  crossing_planner("rsbg_k32", PlannerMode::kRsbg, 32, 2000)};
  const ExperimentResult result = run_experiment(cfg);
  const auto& k16 = planner_summary(result.summary, "rsbg_k16");
  const auto& k32 = planner_summary(result.summary, "rsbg_k32");
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  const double m16 = mean(k16.belief_std_curve);
  const double m32 = mean(k32.belief_std_curve);
  const bool pass = m16 <= m32;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "belief stability (10 trials, first 10 steps): mean "
                "normalized std K16 %.3f <= K32 %.3f",
                m16, m32);
  report(6, pass, detail, /*flag_only=*/true);
  if (!pass) {
    auto dump = [](const char* name, const std::vector<double>& curve) {
      std::printf("     %s curve:", name);
      for (double v : curve) std::printf(" %.3f", v);
      std::printf("\n");
    };
    dump("K16", k16.belief_std_curve);
    dump("K32", k32.belief_std_curve);
  }
}

void criterion_7_belief_convergence() {
  // Scripted crossing episode: every other agent holds the behavior state
  // 3.75, the dead center of cell 5 in the 8-cell expert partition.
  CrossingParams params;
  CrossingEnv env(params);
  const double beta = 3.75;
  const Partition partition =
      partition_equal(expert_full_space(), std::vector<int>{8});
  const int k_star = partition.cell_index({beta});
  const auto hyps =
      partition.hypotheses(std::make_shared<CrossingGapPolicy>());
  TrueBehaviorDraw draw;
  for (int j = 0; j < params.n_agents - 1; ++j) {
    draw.intervals.push_back({beta, beta});
  }
  BeliefUpdateConfig bcfg;
  bcfg.tolerance = 1.0;
  BeliefState belief = BeliefState::init(params.n_agents - 1, 8);
  Rng sim_rng(404), belief_rng(405);
  int converged_at = -1;
  double worst_mass = 0.0;
  for (int step = 1; step <= 10 && !env.terminal(); ++step) {
    const auto prev = env.clone();
    const auto others = simulate_others(env, draw, sim_rng);
    env.step(2, others);  // scripted ego: +1 every step
    for (int j = 1; j < params.n_agents; ++j) {
      belief = update(std::move(belief), j - 1, others[j - 1],
                      prev->history(), hyps, bcfg, belief_rng);
    }
    worst_mass = 1.0;
    for (int j = 0; j < params.n_agents - 1; ++j) {
      worst_mass = std::min(worst_mass, belief.posterior(j)[k_star]);
    }
    if (worst_mass > 0.9) {
      converged_at = step;
      break;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "belief convergence: posterior mass on the true cell %.3f > "
                "0.9 after %d update steps (budget 10)",
                worst_mass, converged_at);
  report(7, converged_at > 0, detail);
}

void criterion_8_car_following() {
  DriverParams p;
  p.v_desired = 15.0;
  p.t_desired = 1.5;
  p.s_min = 2.0;
  p.a_factor = 1.5;
  p.b_comf = 2.0;

  VehicleState free_flow;
  free_flow.v = p.v_desired;
  const bool idm_exact = idm_accel(free_flow, nullptr, p) == 0.0;

  bool acc_matches = true;
  Rng rng(7);
  DriverParams q = p;
  q.coolness = 0.0;
  for (int i = 0; i < 1000; ++i) {
    VehicleState follower;
    follower.v = rng.uniform(0.0, 20.0);
    VehicleState leader;
    leader.s = rng.uniform(6.0, 60.0);
    leader.v = rng.uniform(0.0, 20.0);
    leader.a_last = rng.uniform(-3.0, 3.0);
    acc_matches = acc_matches &&
                  acc_accel(follower, &leader, q) ==
                      idm_accel(follower, &leader, q);
  }

  // Platoon of IDM followers behind a constant-speed lead vehicle, all at
  // the closed-form equilibrium gap.
  const double v = 12.0;
  const double free_term = 1.0 - std::pow(v / p.v_desired, 4.0);
  const double gap_eq = (p.s_min + v * p.t_desired) / std::sqrt(free_term);
  std::vector<VehicleState> platoon(6);
  for (int i = 0; i < 6; ++i) {
    platoon[i].s = -i * (5.0 + gap_eq);
    platoon[i].v = v;
    platoon[i].length = 5.0;
  }
  double max_drift = 0.0;
  const double dt = 0.2;
  for (int step = 0; step < 100; ++step) {
    std::vector<double> accel(platoon.size(), 0.0);
    for (std::size_t i = 1; i < platoon.size(); ++i) {
      accel[i] = idm_accel(platoon[i], &platoon[i - 1], p);
    }
    for (std::size_t i = 0; i < platoon.size(); ++i) {
      platoon[i].v = std::max(0.0, platoon[i].v + accel[i] * dt);
      platoon[i].s += platoon[i].v * dt;
    }
    for (std::size_t i = 1; i < platoon.size(); ++i) {
      const double gap =
          platoon[i - 1].s - platoon[i - 1].length - platoon[i].s;
      max_drift = std::max(max_drift, std::abs(gap - gap_eq) / (step + 1));
    }
  }
  const bool platoon_ok = max_drift <= 1e-6;

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "car-following analytics: IDM free-flow equilibrium %s; "
                "ACC(coolness 0) == IDM over 1000 states %s; platoon gap "
                "drift %.2e per step <= 1e-6",
                idm_exact ? "exact" : "VIOLATED",
                acc_matches ? "exact" : "VIOLATED", max_drift);
  report(8, idm_exact && acc_matches && platoon_ok, detail);
}

void criterion_9_lane_change() {
  ExperimentConfig cfg;
  cfg.domain = DomainKind::kLaneChange;
  cfg.trials = 100;
  cfg.master_seed = 31337;
  cfg.belief.tolerance = 0.65;
  PlannerSpec rsbg;
  rsbg.name = "rsbg_vel16";
  rsbg.search.mode = PlannerMode::kRsbg;
  rsbg.search.iterations = 50;
  rsbg.k = 16;
  rsbg.lane_space = LaneHypothesisSpace::kVelocity1D;
  PlannerSpec sbg = rsbg;
  sbg.name = "sbg_vel16";
  sbg.search.mode = PlannerMode::kSbg;
  cfg.planners = {rsbg, sbg};

  const ExperimentResult result = run_experiment(cfg);
  const auto& r = planner_summary(result.summary, "rsbg_vel16");
  const auto& s = planner_summary(result.summary, "sbg_vel16");
  const bool pass = r.collision_pct <= s.collision_pct;
  report(9, pass,
         "lane-change desk trend (1D velocity space, 50 it, 100 paired "
         "trials): collision RSBG " + pct(r.collision_pct) + " <= SBG " +
             pct(s.collision_pct) + " (success " + pct(r.success_pct) +
             " vs " + pct(s.success_pct) + ")");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_10_determinism() {
  ExperimentConfig cfg = crossing_config();
  cfg.trials = 5;
  cfg.crossing.params.n_agents = 5;
  cfg.planners = {crossing_planner("rsbg_k8", PlannerMode::kRsbg, 8, 300),
                  crossing_planner("sbg_k8", PlannerMode::kSbg, 8, 300)};
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "rsbg_acceptance_det";
  fs::remove_all(base);
  write_results(run_experiment(cfg), (base / "a").string());
  write_results(run_experiment(cfg), (base / "b").string());
  bool pass = true;
  for (const char* name :
       {"results.json", "trials.csv", "belief_std.csv", "summary.csv"}) {
    const std::string a = slurp(base / "a" / name);
    pass = pass && !a.empty() && a == slurp(base / "b" / name);
  }
  fs::remove_all(base);
  report(10, pass,
         std::string("determinism: re-running one config + master seed "
                     "yields byte-identical result files (") +
             (pass ? "verified" : "MISMATCH") + ")");
}

}  // namespace

int main() {
  std::printf("acceptance suite (desk-scale profiles, pinned seeds)\n");
  criterion_1_complexity();
  criterion_2_oracles();
  criterion_3_mode_reduction();
  criteria_4_5_crossing_trends();
  criterion_6_belief_stability();
  criterion_7_belief_convergence();
  criterion_8_car_following();
  criterion_9_lane_change();
  criterion_10_determinism();
  if (g_flags > 0) {
    std::printf("%d criterion(s) flagged (non-gating, see curves above)\n",
                g_flags);
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all gated criteria passed\n");
  return 0;
}
