#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsbg/complexity.hpp"
#include "rsbg/crossing.hpp"
#include "rsbg/search.hpp"
#include "support/test_envs.hpp"

using namespace rsbg;
using rsbg::testing::ChainEnv;
using rsbg::testing::ConstantPolicy;
using rsbg::testing::IdentityPolicy;
using rsbg::testing::JointHistory;
using rsbg::testing::MatrixGameEnv;
using rsbg::testing::NullHistory;
using rsbg::testing::OpponentIndexPolicy;
using rsbg::testing::StageGame;
using rsbg::testing::game_root_action;
using rsbg::testing::game_value;

namespace {

const NullHistory kHistory;

PlannerConfig base_config(PlannerMode mode, int iterations,
                          std::uint64_t seed = 1) {
  PlannerConfig cfg;
  cfg.mode = mode;
  cfg.iterations = iterations;
  cfg.seed = seed;
  // Oracle-convergence fixtures: generous exploration so no arm can starve
  // on an unlucky prefix.
  cfg.ucb_c = 2.0;
  return cfg;
}

// One shared hypothesis over [0,1) whose induced actions are the opponent's
// whole index set.
HypothesisSets opponent_index_hypotheses(int m) {
  return shared_hypothesis_sets(
      {Hypothesis{make_interval_space("beta", 0.0, 1.0),
                  std::make_shared<OpponentIndexPolicy>(m), 1}},
      1);
}

}  // namespace

TEST_CASE("planner config validation") {
  PlannerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = PlannerConfig{};
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = PlannerConfig{};
  cfg.alpha0 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mode predicates") {
  CHECK(worst_case_selection(PlannerMode::kRsbg));
  CHECK(worst_case_selection(PlannerMode::kRmdp));
  CHECK(worst_case_selection(PlannerMode::kRsbgFullInfo));
  CHECK_FALSE(worst_case_selection(PlannerMode::kSbg));
  CHECK_FALSE(worst_case_selection(PlannerMode::kMdp));
  CHECK(partitioned_hypotheses(PlannerMode::kRsbg));
  CHECK(partitioned_hypotheses(PlannerMode::kSbg));
  CHECK_FALSE(partitioned_hypotheses(PlannerMode::kRmdp));
  CHECK(full_info_hypotheses(PlannerMode::kSbgFullInfo));
}

TEST_CASE("select_ego_action explores unvisited actions in index order") {
  SearchNode node;
  node.ego.resize(4);
  PlannerConfig cfg;
  Rng rng(1);
  CHECK(select_ego_action(node, 0b1111, cfg, rng) == 0);
  node.ego[0].visits = 1;
  CHECK(select_ego_action(node, 0b1111, cfg, rng) == 1);
  // Illegal actions are skipped even when unvisited.
  CHECK(select_ego_action(node, 0b1101, cfg, rng) == 2);
}

TEST_CASE("select_ego_action applies normalized UCB") {
  SearchNode node;
  node.ego.resize(2);
  node.ego[0] = {100, 1.0};
  node.ego[1] = {100, 0.0};
  node.ego_visits = 200;
  PlannerConfig cfg;
  cfg.ucb_c = 2.0;
  Rng rng(1);
  // Equal counts: exploration terms tie, the higher mean wins.
  CHECK(select_ego_action(node, 0b11, cfg, rng) == 0);
  // Heavily visited winner: the exploration term flips the choice.
  node.ego[0].visits = 10000;
  node.ego[1].visits = 10;
  CHECK(select_ego_action(node, 0b11, cfg, rng) == 1);
}

TEST_CASE("select_other_action expands while below the widening bound") {
  const auto policy = std::make_shared<IdentityPolicy>();
  const Hypothesis hyp{make_interval_space("x", 0.0, 1.0), policy, 1};
  SearchNode node;
  PlannerConfig cfg = base_config(PlannerMode::kRsbg, 1);
  Rng rng(4);

  // Empty set: the widening bound is 0, expansion happens anyway.
  const auto first = select_other_action(node, 1, 0, hyp, kHistory, cfg, rng);
  CHECK(first.expanded);
  CHECK(node.stats_for(1, 0).expanded.size() == 1);

  // One visit: bound ceil(4 * 1^0.25) = 4 allows more actions.
  node.stats_for(1, 0).visits = 1;
  const auto second = select_other_action(node, 1, 0, hyp, kHistory, cfg, rng);
  CHECK(second.expanded);
  CHECK(node.stats_for(1, 0).expanded.size() == 2);
}

TEST_CASE("select_other_action picks the worst case among expanded actions") {
  const auto policy = std::make_shared<IdentityPolicy>();
  const Hypothesis hyp{make_interval_space("x", 0.0, 1.0), policy, 1};
  SearchNode node;
  auto& set = node.stats_for(1, 0);
  set.expanded = {{0.3, 5, -100.0}, {0.7, 5, 50.0}};
  set.visits = 0;  // bound 0 < |A|, so selection applies
  Rng rng(4);

  PlannerConfig worst = base_config(PlannerMode::kRsbg, 1);
  const auto sel = select_other_action(node, 1, 0, hyp, kHistory, worst, rng);
  CHECK_FALSE(sel.expanded);
  CHECK(sel.entry == 0);
  CHECK(sel.action == 0.3);

  // Random mode stays within the expanded set.
  PlannerConfig random = base_config(PlannerMode::kSbg, 1);
  for (int i = 0; i < 20; ++i) {
    const auto r = select_other_action(node, 1, 0, hyp, kHistory, random, rng);
    CHECK_FALSE(r.expanded);
    CHECK((r.entry == 0 || r.entry == 1));
  }
}

TEST_CASE("duplicate draws fall through to the selection rule") {
  const auto policy = std::make_shared<ConstantPolicy>(7.0);
  const Hypothesis hyp{make_interval_space("x", 0.0, 1.0), policy, 1};
  SearchNode node;
  PlannerConfig cfg = base_config(PlannerMode::kRsbg, 1);
  Rng rng(4);
  const auto first = select_other_action(node, 1, 0, hyp, kHistory, cfg, rng);
  CHECK(first.expanded);
  node.stats_for(1, 0).visits = 1;  // bound 4 would allow expansion
  const auto second = select_other_action(node, 1, 0, hyp, kHistory, cfg, rng);
  CHECK_FALSE(second.expanded);
  CHECK(second.action == 7.0);
  CHECK(node.stats_for(1, 0).expanded.size() == 1);
}

TEST_CASE("backpropagate updates running means along the path") {
  PlannerConfig cfg = base_config(PlannerMode::kRsbg, 1);
  cfg.gamma = 0.9;

  SearchNode root;
  root.ego.resize(2);
  {
    std::vector<PathStep> path{{&root, 0, 100.0, 0, 0}};
    const double ret = backpropagate(path, {}, 0.0, cfg);
    CHECK(ret == 100.0);
    CHECK(root.ego[0].visits == 1);
    CHECK(root.ego[0].value == 100.0);
  }

  SearchNode a, b;
  a.ego.resize(1);
  b.ego.resize(1);
  {
    std::vector<PathStep> path{{&a, 0, 0.0, 0, 0}, {&b, 0, -1000.0, 0, 0}};
    const double ret = backpropagate(path, {}, 0.0, cfg);
    CHECK(ret == doctest::Approx(-900.0));
    CHECK(a.ego[0].value == doctest::Approx(-900.0));
    CHECK(b.ego[0].value == doctest::Approx(-1000.0));
  }

  SearchNode c;
  c.ego.resize(1);
  auto& set = c.stats_for(1, 2);
  set.expanded = {{0.5, 0, 0.0}};
  {
    std::vector<OtherPick> picks{{1, 2, 0}};
    std::vector<PathStep> path{{&c, 0, 10.0, 0, 1}};
    backpropagate(path, picks, 0.0, cfg);
    path[0].reward = 20.0;
    backpropagate(path, picks, 0.0, cfg);
    CHECK(c.ego[0].visits == 2);
    CHECK(c.ego[0].value == doctest::Approx(15.0));
    CHECK(set.visits == 2);
    CHECK(set.expanded[0].visits == 2);
    CHECK(set.expanded[0].value == doctest::Approx(15.0));
  }
}

TEST_CASE("plan rejects bad inputs") {
  ChainEnv env(3, {0.0, 0.2, 0.4, 1.0});
  const BeliefState belief = BeliefState::init(0, 1);
  PlannerConfig cfg = base_config(PlannerMode::kMdp, 0);
  Rng rng(1);
  CHECK_THROWS_AS(plan(env, belief, {}, cfg, rng), std::invalid_argument);

  cfg.iterations = 10;
  const BeliefState wrong = BeliefState::init(3, 1);
  CHECK_THROWS_AS(plan(env, wrong, {}, cfg, rng), std::invalid_argument);

  ChainEnv done(1, {0.0, 1.0});
  done.step(1, {});
  CHECK_THROWS_AS(plan(done, belief, {}, cfg, rng), std::domain_error);
}

TEST_CASE("single-agent chain matches exact value iteration") {
  ChainEnv env(3, {0.5, 0.9, 0.9, 1.0});
  const BeliefState belief = BeliefState::init(0, 1);
  PlannerConfig cfg = base_config(PlannerMode::kRsbg, 10000, 21);
  const SearchResult result = plan(env, belief, {}, cfg);
  const double oracle = env.optimal_value(cfg.gamma);
  CHECK(oracle == doctest::Approx(0.81));  // gamma^2 * 1.0
  CHECK(result.action == 1);  // advance
  CHECK(std::abs(result.root_values[1] - oracle) < 0.01);
}

TEST_CASE("one-step matrix game: maximin vs expectation choices") {
  // Safe action 0 pays 0.3 regardless; risky action 1 pays {1.0, -0.2}.
  // Worst case prefers 0, uniform expectation prefers 1 (0.4 > 0.3).
  StageGame game;
  game.n_ego = 2;
  game.n_opp = 2;
  game.depth = 1;
  game.reward = [](const JointHistory&, int ego, int opp) {
    if (ego == 0) return 0.3;
    return opp == 0 ? 1.0 : -0.2;
  };
  CHECK(game_root_action(game, 0.9, true) == 0);
  CHECK(game_root_action(game, 0.9, false) == 1);

  MatrixGameEnv env(game);
  const BeliefState belief = BeliefState::init(1, 1);
  const HypothesisSets hyps = opponent_index_hypotheses(2);

  const SearchResult rsbg =
      plan(env, belief, hyps, base_config(PlannerMode::kRsbg, 20000, 3));
  CHECK(rsbg.action == 0);
  CHECK(std::abs(rsbg.root_values[0] - game_value(game, 0.9, true)) < 0.05);

  const SearchResult sbg =
      plan(env, belief, hyps, base_config(PlannerMode::kSbg, 20000, 3));
  CHECK(sbg.action == 1);
  CHECK(std::abs(sbg.root_values[1] - game_value(game, 0.9, false)) < 0.05);
}

TEST_CASE("two-step game with history-dependent second stage") {
  // Stage 2 payoffs shift with the stage-1 joint action. Both stage tables
  // have pure saddle points, so the simultaneous per-step worst case
  // coincides with the exhaustive minimax the oracle enumerates.
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
  const HypothesisSets hyps = opponent_index_hypotheses(3);

  const SearchResult rsbg =
      plan(env, belief, hyps, base_config(PlannerMode::kRsbg, 50000, 5));
  const double v_minimax = game_value(game, 0.9, true);
  CHECK(rsbg.action == game_root_action(game, 0.9, true));
  CHECK(std::abs(rsbg.root_values[rsbg.action] - v_minimax) < 0.05);

  const SearchResult sbg =
      plan(env, belief, hyps, base_config(PlannerMode::kSbg, 50000, 5));
  const double v_uniform = game_value(game, 0.9, false);
  CHECK(sbg.action == game_root_action(game, 0.9, false));
  CHECK(std::abs(sbg.root_values[sbg.action] - v_uniform) < 0.05);
}

TEST_CASE("mode reduction: K=1 robust equals RMDP, K=1 Bayesian equals MDP") {
  StageGame game;
  game.n_ego = 2;
  game.n_opp = 2;
  game.depth = 2;
  game.reward = [](const JointHistory& h, int ego, int opp) {
    return (ego == opp ? 0.5 : -0.3) + 0.1 * static_cast<double>(h.size());
  };
  MatrixGameEnv env(game);
  const BeliefState belief = BeliefState::init(1, 1);
  const HypothesisSets hyps = opponent_index_hypotheses(2);

  for (auto [robust, baseline] :
       {std::pair{PlannerMode::kRsbg, PlannerMode::kRmdp},
        std::pair{PlannerMode::kSbg, PlannerMode::kMdp}}) {
    const SearchResult a =
        plan(env, belief, hyps, base_config(robust, 2000, 77));
    const SearchResult b =
        plan(env, belief, hyps, base_config(baseline, 2000, 77));
    CHECK(a.action == b.action);
    CHECK(a.root_visits == b.root_visits);
    for (std::size_t i = 0; i < a.root_values.size(); ++i) {
      if (std::isnan(a.root_values[i])) {
        CHECK(std::isnan(b.root_values[i]));
      } else {
        CHECK(a.root_values[i] == b.root_values[i]);
      }
    }
  }
}

TEST_CASE("seeded searches are reproducible") {
  CrossingParams params;
  params.n_agents = 4;
  CrossingEnv env(params);
  const auto policy = std::make_shared<CrossingGapPolicy>();
  const HypothesisSets hyps = shared_hypothesis_sets(
      partition_equal(expert_full_space(), std::vector<int>{4})
          .hypotheses(policy),
      3);
  const BeliefState belief = BeliefState::init(3, 4);
  const PlannerConfig cfg = base_config(PlannerMode::kRsbg, 500, 99);
  const SearchResult a = plan(env, belief, hyps, cfg);
  const SearchResult b = plan(env, belief, hyps, cfg);
  CHECK(a.action == b.action);
  CHECK(a.root_visits == b.root_visits);
  CHECK(a.root_values[a.action] == b.root_values[b.action]);
}

TEST_CASE("widening bound and type isolation hold during real searches") {
  CrossingParams params;
  params.n_agents = 3;
  CrossingEnv env(params);
  const auto policy = std::make_shared<CrossingGapPolicy>();
  const HypothesisSets hyps = shared_hypothesis_sets(
      partition_equal(expert_full_space(), std::vector<int>{2})
          .hypotheses(policy),
      2);

  // Point-mass belief on hypothesis 0: hypothesis 1 must never be touched.
  BeliefState belief = BeliefState::init(2, 2);
  for (int j = 0; j < 2; ++j) {
    belief.apply_step(j, std::vector<double>{1.0, 0.0});
  }

  SearchDiagnostics diag;
  Rng rng(7);
  plan(env, belief, hyps, base_config(PlannerMode::kRsbg, 2000, 7), rng,
       &diag);
  CHECK(diag.node_count > 0);
  CHECK(diag.widening_violations == 0);
  CHECK(diag.max_expanded >= 1);
  for (int j = 0; j < 2; ++j) {
    CHECK(diag.type_visits[j][0] > 0);
    CHECK(diag.type_visits[j][1] == 0);
  }
}

TEST_CASE("complexity exponents and ratio") {
  const ComplexityReport r = complexity_ratio(16, 9, 20);
  CHECK(r.sbg.behavior_exponent == 160);   // (N-1) * t
  CHECK(r.sbg.hypothesis_exponent == 8 - 160);
  CHECK(r.rsbg.behavior_exponent == 20);
  CHECK(r.rsbg.hypothesis_exponent == 9 - 20);
  CHECK(r.ratio_exponent == 160);
  CHECK(ratio_string(r) == "(|B|/16)^160");

  const ComplexityReport small = complexity_ratio(4, 2, 1);
  CHECK(small.sbg.behavior_exponent == 1);  // N' = 1, t = 1
  CHECK(small.sbg.hypothesis_exponent == 0);
  CHECK(small.exact_ratio.behavior_exponent == 0);

  const ComplexityReport k1 = complexity_ratio(1, 5, 3);
  CHECK(to_string(k1.sbg, 1) == "|B|^12");
  CHECK(to_string(k1.rsbg, 1) == "|B|^3");

  CHECK_THROWS_AS(complexity_ratio(0, 9, 20), std::invalid_argument);
  CHECK_THROWS_AS(complexity_ratio(1, 1, 20), std::invalid_argument);
  CHECK_THROWS_AS(complexity_ratio(1, 9, 0), std::invalid_argument);
}
