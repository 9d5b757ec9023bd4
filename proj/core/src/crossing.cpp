#include "rsbg/crossing.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rsbg {

void CrossingParams::validate() const {
  if (n_agents < 1) throw std::invalid_argument("crossing: n_agents >= 1");
  if (!(chain_min < x_intersect && x_intersect < x_goal &&
        x_goal <= chain_max)) {
    throw std::invalid_argument(
        "crossing: need chain_min < x_intersect < x_goal <= chain_max");
  }
  if (ego_actions.empty() || ego_actions.size() > 32) {
    throw std::invalid_argument("crossing: 1..32 ego actions");
  }
  if (max_steps < 1) throw std::invalid_argument("crossing: max_steps >= 1");
}

double gap_policy(double ego_pos, double ego_last_action, double own_pos,
                  double own_last_action, double desired_gap,
                  double min_velocity, double max_velocity) {
  const double predicted_ego = ego_pos + ego_last_action;
  const double gap_error = predicted_ego - desired_gap - own_pos;
  double action = std::clamp(gap_error, min_velocity, max_velocity);
  if (desired_gap <= 0.0) {
    // Aims to be ahead: never decelerate below the previous action.
    action = std::max(action, own_last_action);
  }
  return action;
}

double CrossingGapPolicy::act(const HistorySlice& history, int agent,
                              std::span<const double> beta) const {
  const auto& h = static_cast<const CrossingHistory&>(history);
  assert(dynamic_cast<const CrossingHistory*>(&history) != nullptr);
  const CrossingState& s = *h.state;
  const CrossingParams& p = *h.params;
  return gap_policy(s.positions[0], s.last_actions[0], s.positions[agent],
                    s.last_actions[agent], beta[0], p.min_velocity,
                    p.max_velocity);
}

CrossingEnv::CrossingEnv(CrossingParams params) : params_(std::move(params)) {
  params_.validate();
  state_.positions.assign(params_.n_agents, params_.initial_position);
  state_.last_actions.assign(params_.n_agents, 0.0);
  state_.crossed.assign(params_.n_agents, 0);
  history_.state = &state_;
  history_.params = &params_;
}

CrossingEnv::CrossingEnv(CrossingParams params, CrossingState state)
    : params_(std::move(params)), state_(std::move(state)) {
  params_.validate();
  if (static_cast<int>(state_.positions.size()) != params_.n_agents ||
      state_.last_actions.size() != state_.positions.size() ||
      state_.crossed.size() != state_.positions.size()) {
    throw std::invalid_argument("crossing: state/params size mismatch");
  }
  history_.state = &state_;
  history_.params = &params_;
}

CrossingEnv::CrossingEnv(const CrossingEnv& other)
    : params_(other.params_), state_(other.state_), outcome_(other.outcome_) {
  history_.state = &state_;
  history_.params = &params_;
}

CrossingEnv& CrossingEnv::operator=(const CrossingEnv& other) {
  params_ = other.params_;
  state_ = other.state_;
  outcome_ = other.outcome_;
  history_.state = &state_;
  history_.params = &params_;
  return *this;
}

std::unique_ptr<Environment> CrossingEnv::clone() const {
  return std::make_unique<CrossingEnv>(*this);
}

std::uint32_t CrossingEnv::legal_ego_mask() const {
  return (1u << params_.ego_actions.size()) - 1u;
}

StepResult CrossingEnv::step(int ego_action,
                             std::span<const double> other_actions) {
  assert(!terminal());
  if (ego_action < 0 || ego_action >= ego_action_count()) {
    throw std::invalid_argument("crossing step: ego action out of range");
  }
  if (static_cast<int>(other_actions.size()) != other_count()) {
    throw std::invalid_argument("crossing step: wrong other-action count");
  }
  for (double a : other_actions) {
    if (a < params_.min_velocity || a > params_.max_velocity) {
      throw std::invalid_argument("crossing step: other action out of range");
    }
  }

  const double ego_value = params_.ego_actions[ego_action];
  bool ego_crossed_now = false;
  bool other_crossed_now = false;
  for (int j = 0; j < params_.n_agents; ++j) {
    const double action = j == 0 ? ego_value : other_actions[j - 1];
    const double old_pos = state_.positions[j];
    const double new_pos =
        std::clamp(old_pos + action, params_.chain_min, params_.chain_max);
    // An agent crosses at this step iff old < x_intersect <= new, once per
    // episode.
    if (!state_.crossed[j] && old_pos < params_.x_intersect &&
        new_pos >= params_.x_intersect) {
      state_.crossed[j] = 1;
      if (j == 0) {
        ego_crossed_now = true;
      } else {
        other_crossed_now = true;
      }
    }
    state_.positions[j] = new_pos;
    state_.last_actions[j] = action;
  }
  ++state_.step;

  const bool collision = ego_crossed_now && other_crossed_now;
  const bool goal = state_.positions[0] >= params_.x_goal;

  StepResult result;
  result.ego_reward = (collision ? params_.collision_reward : 0.0) +
                      (goal ? params_.goal_reward : 0.0);
  if (collision) {
    outcome_ = Outcome::kCollision;
  } else if (goal) {
    outcome_ = Outcome::kSuccess;
  } else if (state_.step >= params_.max_steps) {
    outcome_ = Outcome::kTimeout;
  }
  result.terminal = outcome_ != Outcome::kRunning;
  result.outcome = outcome_;
  return result;
}

std::uint64_t CrossingEnv::state_key() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(state_.step));
  for (int j = 0; j < params_.n_agents; ++j) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.positions[j]));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.last_actions[j]));
    h = mix64(h ^ static_cast<std::uint64_t>(state_.crossed[j]));
  }
  return h;
}

std::string CrossingEnv::ego_action_label(int action) const {
  return std::to_string(params_.ego_actions.at(action));
}

int CrossingEnv::rollout_ego_action(Rng& rng) const {
  const double x = state_.positions[0];
  int fastest = 0;
  int fastest_safe = -1;
  for (int a = 1; a < ego_action_count(); ++a) {
    if (params_.ego_actions[a] > params_.ego_actions[fastest]) fastest = a;
  }
  for (int a = 0; a < ego_action_count(); ++a) {
    if (x + params_.ego_actions[a] < params_.x_intersect &&
        (fastest_safe < 0 ||
         params_.ego_actions[a] > params_.ego_actions[fastest_safe])) {
      fastest_safe = a;
    }
  }
  if (state_.crossed[0] || fastest_safe < 0) return fastest;
  if (x + params_.ego_actions[fastest] < params_.x_intersect) {
    return fastest;  // full speed cannot reach the crossing point yet
  }
  return rng.uniform() < 0.5 ? fastest : fastest_safe;
}

TrueSpaceVariant true_space_variant_from_string(const std::string& s) {
  if (s == "symmetric") return TrueSpaceVariant::kSymmetric;
  if (s == "unsymmetric") return TrueSpaceVariant::kUnsymmetric;
  throw std::invalid_argument("unknown true-space variant: " + s);
}

const char* to_string(TrueSpaceVariant v) {
  return v == TrueSpaceVariant::kSymmetric ? "symmetric" : "unsymmetric";
}

BehaviorSpace crossing_true_space(TrueSpaceVariant variant) {
  const double lower = variant == TrueSpaceVariant::kSymmetric ? -5.0 : -2.5;
  return make_interval_space("desired_gap", lower, 5.0, "chain units");
}

TrueBehaviorDraw draw_true_behaviors(const BehaviorSpace& true_space,
                                     int n_others, Rng& rng) {
  const auto& dim = true_space.dims().front();
  TrueBehaviorDraw draw;
  draw.intervals.reserve(n_others);
  for (int j = 0; j < n_others; ++j) {
    double a = rng.uniform(dim.lower, dim.upper);
    double b = rng.uniform(dim.lower, dim.upper);
    if (b < a) std::swap(a, b);
    draw.intervals.push_back(Interval{a, b});
  }
  return draw;
}

std::vector<double> simulate_others(const CrossingEnv& env,
                                    const TrueBehaviorDraw& draw, Rng& rng) {
  const CrossingState& s = env.state();
  const CrossingParams& p = env.params();
  std::vector<double> actions(env.other_count());
  for (int j = 1; j < p.n_agents; ++j) {
    const Interval& iv = draw.intervals[j - 1];
    const double omega = rng.uniform(iv.lower, iv.upper);
    actions[j - 1] =
        gap_policy(s.positions[0], s.last_actions[0], s.positions[j],
                   s.last_actions[j], omega, p.min_velocity, p.max_velocity);
  }
  return actions;
}

BehaviorSpace expert_full_space() {
  return make_interval_space("desired_gap", -10.0, 10.0, "chain units");
}

}  // namespace rsbg
