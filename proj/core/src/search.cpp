#include "rsbg/search.hpp"

#include <bit>
#include <cassert>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace rsbg {

const char* to_string(PlannerMode m) {
  switch (m) {
    case PlannerMode::kRsbg: return "RSBG";
    case PlannerMode::kSbg: return "SBG";
    case PlannerMode::kRmdp: return "RMDP";
    case PlannerMode::kMdp: return "MDP";
    case PlannerMode::kRsbgFullInfo: return "RSBGFullInfo";
    case PlannerMode::kSbgFullInfo: return "SBGFullInfo";
  }
  return "?";
}

PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "RSBG") return PlannerMode::kRsbg;
  if (s == "SBG") return PlannerMode::kSbg;
  if (s == "RMDP") return PlannerMode::kRmdp;
  if (s == "MDP") return PlannerMode::kMdp;
  if (s == "RSBGFullInfo") return PlannerMode::kRsbgFullInfo;
  if (s == "SBGFullInfo") return PlannerMode::kSbgFullInfo;
  throw std::invalid_argument("unknown planner mode: " + s);
}

bool worst_case_selection(PlannerMode m) {
  return m == PlannerMode::kRsbg || m == PlannerMode::kRmdp ||
         m == PlannerMode::kRsbgFullInfo;
}

bool partitioned_hypotheses(PlannerMode m) {
  return m == PlannerMode::kRsbg || m == PlannerMode::kSbg;
}

bool full_info_hypotheses(PlannerMode m) {
  return m == PlannerMode::kRsbgFullInfo || m == PlannerMode::kSbgFullInfo;
}

void PlannerConfig::validate() const {
  if (iterations < 1) {
    throw std::invalid_argument("planner: iterations must be >= 1");
  }
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw std::invalid_argument("planner: gamma must be in (0, 1]");
  }
  if (!(k0 > 0.0)) throw std::invalid_argument("planner: k0 must be > 0");
  if (!(alpha0 > 0.0) || alpha0 >= 1.0) {
    throw std::invalid_argument("planner: alpha0 must be in (0, 1)");
  }
  if (!(ucb_c > 0.0)) throw std::invalid_argument("planner: ucb_c must be > 0");
  if (max_depth < 1) {
    throw std::invalid_argument("planner: max_depth must be >= 1");
  }
  if (rollout_depth < 0) {
    throw std::invalid_argument("planner: rollout_depth must be >= 0");
  }
}

HypothesisSets shared_hypothesis_sets(std::vector<Hypothesis> hypotheses,
                                      int n_others) {
  HypothesisSets sets;
  sets.reserve(n_others);
  for (int j = 0; j < n_others; ++j) sets.push_back(hypotheses);
  return sets;
}

int select_ego_action(const SearchNode& node, std::uint32_t legal_mask,
                      const PlannerConfig& cfg, Rng& /*rng*/) {
  // Exploration first: lowest-index unvisited legal action.
  for (int a = 0; a < static_cast<int>(node.ego.size()); ++a) {
    if ((legal_mask >> a) & 1u) {
      if (node.ego[a].visits == 0) return a;
    }
  }
  double qmin = std::numeric_limits<double>::infinity();
  double qmax = -std::numeric_limits<double>::infinity();
  int total = 0;
  for (int a = 0; a < static_cast<int>(node.ego.size()); ++a) {
    if (!((legal_mask >> a) & 1u)) continue;
    qmin = std::min(qmin, node.ego[a].value);
    qmax = std::max(qmax, node.ego[a].value);
    total += node.ego[a].visits;
  }
  const double spread = qmax - qmin;
  const double log_total = std::log(static_cast<double>(total));
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < static_cast<int>(node.ego.size()); ++a) {
    if (!((legal_mask >> a) & 1u)) continue;
    const double q_hat =
        spread > 0.0 ? (node.ego[a].value - qmin) / spread : 0.5;
    const double score =
        q_hat + cfg.ucb_c * std::sqrt(log_total / node.ego[a].visits);
    if (score > best_score) {  // strict: ties keep the lowest index
      best_score = score;
      best = a;
    }
  }
  return best;
}

OtherSelection select_other_action(SearchNode& node, int agent,
                                   int sampled_type, const Hypothesis& hyp,
                                   const HistorySlice& history,
                                   const PlannerConfig& cfg, Rng& rng) {
  HypothesisActionSet& set = node.stats_for(agent, sampled_type);
  const double bound =
      std::ceil(cfg.k0 * std::pow(static_cast<double>(set.visits), cfg.alpha0));
  if (set.expanded.empty() ||
      static_cast<double>(set.expanded.size()) < bound) {
    const double action = hyp.sample_action(history, agent, rng);
    bool known = false;
    for (const OtherActionStats& stat : set.expanded) {
      if (stat.action == action) {
        known = true;
        break;
      }
    }
    // Atomic action distributions redraw known values; those visits go
    // through the selection rule instead of fragmenting the statistics.
    if (!known) {
      OtherActionStats stat;
      stat.action = action;
      set.expanded.push_back(stat);
      return {action, static_cast<int>(set.expanded.size()) - 1, true};
    }
  }
  int pick;
  if (worst_case_selection(cfg.mode)) {
    pick = 0;
    for (int i = 1; i < static_cast<int>(set.expanded.size()); ++i) {
      if (set.expanded[i].value < set.expanded[pick].value) pick = i;
    }
  } else {
    pick = static_cast<int>(rng.uniform_index(set.expanded.size()));
  }
  return {set.expanded[pick].action, pick, false};
}

double backpropagate(std::span<PathStep> path, std::span<const OtherPick> picks,
                     double terminal_return, const PlannerConfig& cfg) {
  double ret = terminal_return;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    ret = it->reward + cfg.gamma * ret;
    SearchNode& node = *it->node;
    EgoActionStats& ego = node.ego[it->ego_action];
    ++ego.visits;
    ego.value += (ret - ego.value) / ego.visits;
    ++node.ego_visits;
    for (int p = it->picks_offset; p < it->picks_offset + it->picks_count;
         ++p) {
      const OtherPick& pick = picks[p];
      HypothesisActionSet& set = node.stats_for(pick.agent, pick.type);
      ++set.visits;
      OtherActionStats& stat = set.expanded[pick.entry];
      ++stat.visits;
      stat.value += (ret - stat.value) / stat.visits;
    }
  }
  return ret;
}

namespace {

std::uint64_t joint_action_key(int ego_action,
                               std::span<const double> other_actions,
                               double resolution) {
  std::uint64_t h = mix64(0x5acb3ULL + static_cast<std::uint64_t>(ego_action));
  for (double a : other_actions) {
    if (resolution > 0.0) {
      const auto bin = static_cast<std::int64_t>(std::llround(a / resolution));
      h = mix64(h ^ static_cast<std::uint64_t>(bin));
    } else {
      h = mix64(h ^ std::bit_cast<std::uint64_t>(a));
    }
  }
  return h;
}

void ensure_ego_stats(SearchNode& node, int n_actions) {
  if (node.ego.empty()) node.ego.resize(n_actions);
}

// Playout tail value: ego actions from the environment's rollout policy,
// other agents sampled from their currently assigned hypotheses.
double rollout(Environment& sim, std::span<const int> types,
               const HypothesisSets& hypotheses, const PlannerConfig& cfg,
               Rng& rng, std::vector<double>& action_buf) {
  double ret = 0.0;
  double discount = 1.0;
  for (int d = 0; d < cfg.rollout_depth && !sim.terminal(); ++d) {
    if (sim.legal_ego_mask() == 0) break;
    const int ego_action = sim.rollout_ego_action(rng);
    action_buf.clear();
    for (int j = 1; j < sim.agent_count(); ++j) {
      action_buf.push_back(
          hypotheses[j - 1][types[j - 1]].sample_action(sim.history(), j, rng));
    }
    const StepResult sr = sim.step(ego_action, action_buf);
    ret += discount * sr.ego_reward;
    discount *= cfg.gamma;
    if (sr.terminal) break;
  }
  return ret;
}

}  // namespace

SearchResult plan(const Environment& env, const BeliefState& belief,
                  const HypothesisSets& hypotheses, const PlannerConfig& cfg,
                  Rng& rng, SearchDiagnostics* diagnostics) {
  cfg.validate();
  const int n_others = env.other_count();
  if (belief.num_agents() != n_others ||
      static_cast<int>(hypotheses.size()) != n_others) {
    throw std::invalid_argument(
        "plan: belief/hypothesis dimensions must match the environment");
  }
  for (const auto& list : hypotheses) {
    if (static_cast<int>(list.size()) != belief.k()) {
      throw std::invalid_argument(
          "plan: every hypothesis list must have K entries");
    }
  }
  if (env.terminal()) throw std::domain_error("plan: state is terminal");
  const std::uint32_t root_mask = env.legal_ego_mask();
  if (root_mask == 0) throw std::domain_error("plan: no legal ego action");

  const auto t0 = std::chrono::steady_clock::now();

  std::deque<SearchNode> arena;
  arena.emplace_back();
  SearchNode* root = &arena.front();
  root->state_hash = env.state_key();

  std::vector<PathStep> path;
  std::vector<OtherPick> picks;
  std::vector<double> other_actions;
  path.reserve(cfg.max_depth);
  picks.reserve(static_cast<std::size_t>(cfg.max_depth) * n_others);

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::vector<int> types = belief.sample_joint_type(rng);
    auto sim = env.clone();
    SearchNode* node = root;
    int depth = 0;
    bool run_rollout = false;
    path.clear();
    picks.clear();

    while (true) {
      if (sim->terminal()) break;
      if (depth >= cfg.max_depth) {
        run_rollout = true;
        break;
      }
      ensure_ego_stats(*node, env.ego_action_count());
      const int ego_action =
          select_ego_action(*node, sim->legal_ego_mask(), cfg, rng);
      const int picks_offset = static_cast<int>(picks.size());
      other_actions.clear();
      for (int j = 1; j <= n_others; ++j) {
        const int type = types[j - 1];
        const OtherSelection sel = select_other_action(
            *node, j, type, hypotheses[j - 1][type], sim->history(), cfg, rng);
        other_actions.push_back(sel.action);
        picks.push_back(OtherPick{j, type, sel.entry});
      }
      const StepResult sr = sim->step(ego_action, other_actions);
      path.push_back(PathStep{node, ego_action, sr.ego_reward, picks_offset,
                              n_others});

      const std::uint64_t key = joint_action_key(ego_action, other_actions,
                                                 cfg.action_key_resolution);
      auto [slot, inserted] = node->children.try_emplace(key, nullptr);
      if (inserted) {
        arena.emplace_back();
        slot->second = &arena.back();
        // First state reaching this node; with a coarse key resolution the
        // node aggregates nearby continuous branches, so this is a
        // representative, not an identity.
        slot->second->state_hash = sim->state_key();
        node = slot->second;
        ++depth;
        run_rollout = !sr.terminal;  // new leaf: estimate the tail once
        break;
      }
      node = slot->second;
      ++depth;
      if (sr.terminal) break;
    }

    const double tail =
        run_rollout ? rollout(*sim, types, hypotheses, cfg, rng, other_actions)
                    : 0.0;
    backpropagate(path, picks, tail, cfg);
  }

  SearchResult result;
  result.iterations = cfg.iterations;
  result.root_values.assign(env.ego_action_count(),
                            std::numeric_limits<double>::quiet_NaN());
  result.root_visits.assign(env.ego_action_count(), 0);
  ensure_ego_stats(*root, env.ego_action_count());
  int best = -1;
  for (int a = 0; a < env.ego_action_count(); ++a) {
    if (!((root_mask >> a) & 1u)) continue;
    const EgoActionStats& st = root->ego[a];
    result.root_visits[a] = st.visits;
    if (st.visits == 0) continue;
    result.root_values[a] = st.value;
    if (best < 0 || st.value > root->ego[best].value) best = a;
  }
  if (best < 0) best = std::countr_zero(root_mask);
  result.action = best;

  if (diagnostics != nullptr) {
    diagnostics->node_count = static_cast<long long>(arena.size());
    diagnostics->type_visits.assign(
        n_others, std::vector<long long>(belief.k(), 0));
    for (const SearchNode& node : arena) {
      for (const auto& [key, set] : node.other_stats) {
        const int agent = static_cast<int>(key >> 20);
        const int type = static_cast<int>(key & 0xfffffu);
        diagnostics->type_visits[agent - 1][type] += set.visits;
        diagnostics->max_expanded = std::max(
            diagnostics->max_expanded, static_cast<int>(set.expanded.size()));
        const double bound = std::max(
            1.0, std::ceil(cfg.k0 * std::pow(static_cast<double>(set.visits),
                                             cfg.alpha0)));
        if (static_cast<double>(set.expanded.size()) > bound) {
          ++diagnostics->widening_violations;
        }
      }
    }
  }
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return result;
}

SearchResult plan(const Environment& env, const BeliefState& belief,
                  const HypothesisSets& hypotheses, const PlannerConfig& cfg) {
  Rng rng(cfg.seed);
  return plan(env, belief, hypotheses, cfg, rng);
}

}  // namespace rsbg
