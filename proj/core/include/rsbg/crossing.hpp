#pragma once

#include <cstdint>
#include <vector>

#include "rsbg/behavior_space.hpp"
#include "rsbg/environment.hpp"
#include "rsbg/rng.hpp"

namespace rsbg {

// Chain-intersection world: N agents move along 1-D chains that all cross a
// common point. Two agents collide when they pass the crossing point in the
// same time step.
struct CrossingParams {
  int n_agents = 9;
  double chain_min = 0.0;
  double chain_max = 17.0;
  double x_intersect = 15.0;
  double x_goal = 17.0;
  double initial_position = 5.0;
  double min_velocity = -5.0;  // other-agent action bounds
  double max_velocity = 5.0;
  std::vector<double> ego_actions{-1.0, 0.0, 1.0, 2.0};
  double collision_reward = -1000.0;
  double goal_reward = 100.0;
  int max_steps = 50;

  void validate() const;
};

struct CrossingState {
  std::vector<double> positions;
  std::vector<double> last_actions;
  std::vector<std::uint8_t> crossed;
  int step = 0;
};

// Desired-gap policy. Predicts the ego position one step ahead from its last
// action, then closes the gap error toward (predicted ego - desired_gap),
// clamped to the velocity bounds. An agent aiming to be ahead
// (desired_gap <= 0) additionally never picks an action below its previous
// one.
double gap_policy(double ego_pos, double ego_last_action, double own_pos,
                  double own_last_action, double desired_gap,
                  double min_velocity = -5.0, double max_velocity = 5.0);

struct CrossingHistory final : public HistorySlice {
  const CrossingState* state = nullptr;
  const CrossingParams* params = nullptr;
};

// Hypothetical policy over the 1-D desired-gap behavior space.
class CrossingGapPolicy final : public HypotheticalPolicy {
 public:
  double act(const HistorySlice& history, int agent,
             std::span<const double> beta) const override;
};

class CrossingEnv final : public Environment {
 public:
  explicit CrossingEnv(CrossingParams params);
  // Starts from an explicit state (scripted scenarios, replays).
  CrossingEnv(CrossingParams params, CrossingState state);
  CrossingEnv(const CrossingEnv& other);
  CrossingEnv& operator=(const CrossingEnv& other);

  std::unique_ptr<Environment> clone() const override;
  int agent_count() const override { return params_.n_agents; }
  int ego_action_count() const override {
    return static_cast<int>(params_.ego_actions.size());
  }
  std::uint32_t legal_ego_mask() const override;
  StepResult step(int ego_action,
                  std::span<const double> other_actions) override;
  bool terminal() const override { return outcome_ != Outcome::kRunning; }
  const HistorySlice& history() const override { return history_; }
  std::uint64_t state_key() const override;
  std::string ego_action_label(int action) const override;
  // Playout policy: advance at full speed while that cannot reach the
  // crossing point, after crossing as well; at the line, cross or hold with
  // equal probability so playouts sample both committing and yielding.
  int rollout_ego_action(Rng& rng) const override;

  const CrossingState& state() const { return state_; }
  const CrossingParams& params() const { return params_; }
  Outcome outcome() const { return outcome_; }

 private:
  CrossingParams params_;
  CrossingState state_;
  Outcome outcome_ = Outcome::kRunning;
  CrossingHistory history_;
};

// Hidden per-trial behavior interval of one other agent.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

enum class TrueSpaceVariant { kSymmetric, kUnsymmetric };

TrueSpaceVariant true_space_variant_from_string(const std::string& s);
const char* to_string(TrueSpaceVariant v);

// The simulated true behavior space: [-5, 5] or [-2.5, 5].
BehaviorSpace crossing_true_space(TrueSpaceVariant variant);

// Per-other-agent intervals, each drawn as two independent uniforms over the
// true space, sorted.
struct TrueBehaviorDraw {
  std::vector<Interval> intervals;  // indexed by agent-1
};

TrueBehaviorDraw draw_true_behaviors(const BehaviorSpace& true_space,
                                     int n_others, Rng& rng);

// One simulation step of the other agents: each draws a fresh desired gap
// uniformly from its interval and acts with the gap policy.
std::vector<double> simulate_others(const CrossingEnv& env,
                                    const TrueBehaviorDraw& draw, Rng& rng);

// Expert-defined full desired-gap space [-10, 10].
BehaviorSpace expert_full_space();

}  // namespace rsbg
