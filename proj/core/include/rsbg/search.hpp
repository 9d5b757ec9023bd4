#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "rsbg/behavior_space.hpp"
#include "rsbg/belief.hpp"
#include "rsbg/environment.hpp"
#include "rsbg/rng.hpp"

namespace rsbg {

// Planner family. The mode decides two things: where hypothesis sets come
// from (expert partition, single full-space hypothesis, or the simulator's
// true per-trial behavior box) and how other-agent actions are picked among
// the expanded set (worst case for the ego vs. random).
enum class PlannerMode {
  kRsbg,
  kSbg,
  kRmdp,
  kMdp,
  kRsbgFullInfo,
  kSbgFullInfo,
};

const char* to_string(PlannerMode m);
PlannerMode planner_mode_from_string(const std::string& s);

// Worst-case (min over expanded actions) other-agent selection.
bool worst_case_selection(PlannerMode m);
// Hypotheses from an equal-volume partition of the expert full space.
bool partitioned_hypotheses(PlannerMode m);
// Hypotheses equal to the simulator's true per-trial behavior box.
bool full_info_hypotheses(PlannerMode m);

struct PlannerConfig {
  PlannerMode mode = PlannerMode::kRsbg;
  int iterations = 10000;
  double gamma = 0.9;
  double k0 = 4.0;       // progressive widening scale
  double alpha0 = 0.25;  // progressive widening exponent
  double ucb_c = 0.7;
  int max_depth = 30;
  int rollout_depth = 15;
  // Bin width used to discretize other-agent actions in child-node keys.
  // Nearby continuous actions share a subtree; statistics stay per exact
  // action. Zero keys children by exact values.
  double action_key_resolution = 0.5;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on an out-of-range field.
  void validate() const;
};

struct EgoActionStats {
  int visits = 0;
  double value = 0.0;  // running mean of discounted ego returns
};

struct OtherActionStats {
  double action = 0.0;
  int visits = 0;
  double value = 0.0;  // running mean of ego returns under this action
};

// Expanded action set and visit count of one (agent, hypothesis) pair at a
// node. Entries keep expansion order; values may repeat when the induced
// action distribution has atoms.
struct HypothesisActionSet {
  std::vector<OtherActionStats> expanded;
  int visits = 0;
};

// One history node of the search tree. Histories are identified by the
// sequence of joint actions from the root; state_hash cross-checks that
// transitions stayed deterministic.
struct SearchNode {
  std::vector<EgoActionStats> ego;
  int ego_visits = 0;
  std::unordered_map<std::uint32_t, HypothesisActionSet> other_stats;
  std::unordered_map<std::uint64_t, SearchNode*> children;
  std::uint64_t state_hash = 0;

  HypothesisActionSet& stats_for(int agent, int type) {
    return other_stats[pack_agent_type(agent, type)];
  }
  static std::uint32_t pack_agent_type(int agent, int type) {
    return (static_cast<std::uint32_t>(agent) << 20) |
           static_cast<std::uint32_t>(type);
  }
};

struct SearchResult {
  int action = 0;                   // index into the ego action set
  std::vector<double> root_values;  // NaN where never visited
  std::vector<int> root_visits;
  int iterations = 0;
  double wall_time_ms = 0.0;
};

// Hypothesis lists per other agent, indexed by agent-1.
using HypothesisSets = std::vector<std::vector<Hypothesis>>;

// All other agents share one hypothesis list (the common-partition case).
HypothesisSets shared_hypothesis_sets(std::vector<Hypothesis> hypotheses,
                                      int n_others);

// Unvisited legal actions first in index order, then argmax of the min-max
// normalized mean value plus the exploration term
// ucb_c * sqrt(ln(N_total) / N_i). Ties break toward the lowest index.
int select_ego_action(const SearchNode& node, std::uint32_t legal_mask,
                      const PlannerConfig& cfg, Rng& rng);

struct OtherSelection {
  double action = 0.0;
  int entry = 0;        // index into the expanded list
  bool expanded = false;  // true when this call grew the expanded set
};

// Hypothesis-based progressive widening plus the mode's selection rule:
// while |expanded| < ceil(k0 * N^alpha0) (or the set is empty), draw a fresh
// action from the hypothesis; otherwise pick the worst-case (min value) or a
// uniformly random expanded action. Ties break toward earliest expansion.
OtherSelection select_other_action(SearchNode& node, int agent,
                                   int sampled_type, const Hypothesis& hyp,
                                   const HistorySlice& history,
                                   const PlannerConfig& cfg, Rng& rng);

struct OtherPick {
  int agent = 0;
  int type = 0;
  int entry = 0;
};

struct PathStep {
  SearchNode* node = nullptr;
  int ego_action = 0;
  double reward = 0.0;
  int picks_offset = 0;  // into the flat picks span
  int picks_count = 0;
};

// Leaf-to-root discounted backup: return_d = reward_d + gamma * return_{d+1}.
// Updates the running means and counts of the ego action taken at every node
// and, for the sampled (agent, type) pairs only, of the chosen other-agent
// actions. Returns the root return.
double backpropagate(std::span<PathStep> path, std::span<const OtherPick> picks,
                     double terminal_return, const PlannerConfig& cfg);

// Post-search instrumentation, collected by walking the finished tree.
struct SearchDiagnostics {
  long long node_count = 0;
  int max_expanded = 0;  // largest expanded set over all (node, agent, type)
  // Sets whose expanded count exceeds max(1, ceil(k0 * visits^alpha0)).
  long long widening_violations = 0;
  // Visit totals per (other agent, hypothesis index).
  std::vector<std::vector<long long>> type_visits;
};

// Runs cfg.iterations simulated episodes from env's current state and picks
// the root action with the highest mean return (lowest index on ties).
// Throws std::domain_error when the state is terminal or no ego action is
// legal, std::invalid_argument on config or dimension errors.
SearchResult plan(const Environment& env, const BeliefState& belief,
                  const HypothesisSets& hypotheses, const PlannerConfig& cfg,
                  Rng& rng, SearchDiagnostics* diagnostics = nullptr);

// Convenience overload seeding the search from cfg.seed.
SearchResult plan(const Environment& env, const BeliefState& belief,
                  const HypothesisSets& hypotheses, const PlannerConfig& cfg);

}  // namespace rsbg
