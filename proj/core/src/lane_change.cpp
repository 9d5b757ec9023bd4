#include "rsbg/lane_change.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rsbg {

namespace {

constexpr double kMinPolicyGap = 0.1;  // guard for non-terminal overlaps

double clamp_accel(double a) { return std::clamp(a, kAccelMin, kAccelMax); }

double gap_between(const VehicleState& follower, const VehicleState& leader) {
  return leader.s - leader.length - follower.s;
}

}  // namespace

DriverParams DriverParamRanges::center(double coolness) const {
  DriverParams p;
  p.v_desired = 0.5 * (v_desired.lower + v_desired.upper);
  p.t_desired = 0.5 * (t_desired.lower + t_desired.upper);
  p.s_min = 0.5 * (s_min.lower + s_min.upper);
  p.a_factor = 0.5 * (a_factor.lower + a_factor.upper);
  p.b_comf = 0.5 * (b_comf.lower + b_comf.upper);
  p.coolness = coolness;
  return p;
}

double idm_accel(const VehicleState& follower, const VehicleState* leader,
                 const DriverParams& p) {
  const double v = follower.v;
  const double free_term = 1.0 - std::pow(v / p.v_desired, 4.0);
  if (leader == nullptr) {
    return clamp_accel(p.a_factor * free_term);
  }
  const double gap = gap_between(follower, *leader);
  assert(gap > 0.0);
  const double dv = v - leader->v;
  const double s_star =
      p.s_min + std::max(0.0, v * p.t_desired +
                                  v * dv / (2.0 * std::sqrt(p.a_factor *
                                                            p.b_comf)));
  const double ratio = s_star / gap;
  return clamp_accel(p.a_factor * (free_term - ratio * ratio));
}

double cah_accel(const VehicleState& follower, const VehicleState& leader,
                 const DriverParams& p) {
  const double gap = gap_between(follower, leader);
  assert(gap > 0.0);
  const double v = follower.v;
  const double vl = leader.v;
  const double a_lead = std::min(leader.a_last, p.a_factor);
  const double denom = vl * vl - 2.0 * gap * a_lead;
  double a;
  if (vl * (v - vl) <= -2.0 * gap * a_lead && denom != 0.0) {
    a = v * v * a_lead / denom;
  } else {
    const double dv = v - vl;
    a = a_lead - (dv > 0.0 ? dv * dv / (2.0 * gap) : 0.0);
  }
  return clamp_accel(a);
}

double acc_accel(const VehicleState& follower, const VehicleState* leader,
                 const DriverParams& p) {
  const double a_idm = idm_accel(follower, leader, p);
  if (leader == nullptr) return a_idm;
  const double a_cah = cah_accel(follower, *leader, p);
  if (a_idm >= a_cah) return a_idm;
  const double c = p.coolness;
  const double blended =
      (1.0 - c) * a_idm +
      c * (a_cah + p.b_comf * std::tanh((a_idm - a_cah) / p.b_comf));
  return clamp_accel(blended);
}

const char* to_string(EgoMacro m) {
  switch (m) {
    case EgoMacro::kLaneChange: return "LaneChange";
    case EgoMacro::kKeepMinus5: return "Keep(-5)";
    case EgoMacro::kKeepMinus1: return "Keep(-1)";
    case EgoMacro::kKeepZero: return "Keep(0)";
    case EgoMacro::kKeepPlus1: return "Keep(1)";
    case EgoMacro::kKeepPlus4: return "Keep(4)";
    case EgoMacro::kGapKeepIdm: return "GapKeepIDM";
  }
  return "?";
}

void LaneChangeParams::validate() const {
  if (n_others < 1) throw std::invalid_argument("lane change: n_others >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("lane change: dt > 0");
  if (!(lane_change_duration > 0.0)) {
    throw std::invalid_argument("lane change: lane_change_duration > 0");
  }
  if (!(time_budget > 0.0)) {
    throw std::invalid_argument("lane change: time_budget > 0");
  }
  if (!(vehicle_length > 0.0)) {
    throw std::invalid_argument("lane change: vehicle_length > 0");
  }
  if (!(initial_gap.lower > 0.0) || initial_gap.upper < initial_gap.lower) {
    throw std::invalid_argument("lane change: bad initial gap range");
  }
  if (initial_speed.lower < 0.0 ||
      initial_speed.upper < initial_speed.lower) {
    throw std::invalid_argument("lane change: bad initial speed range");
  }
}

namespace {

// Nearest vehicle ahead of position `s` on the left lane; the ego joins the
// lane once its progress passes 0.5. `skip_other` excludes the follower
// itself, -1 skips nobody; set `include_ego` false when looking for the
// ego's own leader.
const VehicleState* left_lane_leader(const LaneChangeState& state, double s,
                                     int skip_other, bool include_ego) {
  const VehicleState* best = nullptr;
  for (int i = 0; i < static_cast<int>(state.others.size()); ++i) {
    if (i == skip_other) continue;
    const VehicleState& v = state.others[i];
    if (v.s > s && (best == nullptr || v.s < best->s)) best = &v;
  }
  if (include_ego && state.ego_progress >= 0.5 && state.ego.s > s &&
      (best == nullptr || state.ego.s < best->s)) {
    best = &state.ego;
  }
  return best;
}

}  // namespace

double other_agent_accel(const LaneChangeState& state,
                         const LaneChangeParams& /*params*/, int agent,
                         const DriverParams& driver) {
  const VehicleState& self = state.others[agent - 1];
  const VehicleState* leader =
      left_lane_leader(state, self.s, agent - 1, /*include_ego=*/true);
  if (leader == nullptr) return idm_accel(self, nullptr, driver);
  VehicleState guarded = *leader;
  // Non-terminal overlaps (between two modeled vehicles) keep the model
  // defined by flooring the gap.
  if (gap_between(self, guarded) < kMinPolicyGap) {
    guarded.s = self.s + guarded.length + kMinPolicyGap;
  }
  return acc_accel(self, &guarded, driver);
}

LaneChangeEnv::LaneChangeEnv(LaneChangeParams params, LaneChangeState initial)
    : params_(std::move(params)), state_(std::move(initial)) {
  params_.validate();
  if (static_cast<int>(state_.others.size()) != params_.n_others) {
    throw std::invalid_argument("lane change: state/params vehicle mismatch");
  }
  history_.state = &state_;
  history_.params = &params_;
}

LaneChangeEnv::LaneChangeEnv(const LaneChangeEnv& other)
    : params_(other.params_), state_(other.state_), outcome_(other.outcome_) {
  history_.state = &state_;
  history_.params = &params_;
}

LaneChangeEnv& LaneChangeEnv::operator=(const LaneChangeEnv& other) {
  params_ = other.params_;
  state_ = other.state_;
  outcome_ = other.outcome_;
  history_.state = &state_;
  history_.params = &params_;
  return *this;
}

LaneChangeEnv LaneChangeEnv::sample_scenario(const LaneChangeParams& params,
                                             Rng& rng) {
  params.validate();
  LaneChangeState state;
  state.others.resize(params.n_others);
  double s = 0.0;
  for (int i = 0; i < params.n_others; ++i) {
    if (i > 0) {
      s += params.vehicle_length +
           rng.uniform(params.initial_gap.lower, params.initial_gap.upper);
    }
    state.others[i].lane = Lane::kLeft;
    state.others[i].s = s;
    state.others[i].length = params.vehicle_length;
  }
  for (int i = 0; i < params.n_others; ++i) {
    state.others[i].v =
        rng.uniform(params.initial_speed.lower, params.initial_speed.upper);
  }
  state.ego.lane = Lane::kRight;
  state.ego.length = params.vehicle_length;
  // The ego starts blocked: roughly alongside one of the platoon vehicles,
  // so it has to adjust longitudinally before a gap opens.
  const int blocker =
      static_cast<int>(rng.uniform_index(state.others.size()));
  state.ego.s = state.others[blocker].s + rng.uniform(-2.0, 2.0);
  state.ego.v =
      rng.uniform(params.initial_speed.lower, params.initial_speed.upper);
  return LaneChangeEnv(params, std::move(state));
}

std::unique_ptr<Environment> LaneChangeEnv::clone() const {
  return std::make_unique<LaneChangeEnv>(*this);
}

std::uint32_t LaneChangeEnv::legal_ego_mask() const {
  if (state_.ego_progress <= 0.0) {
    return (1u << kEgoMacroCount) - 1u;  // on the right lane: everything
  }
  if (state_.ego_progress < 1.0) {
    // Mid-change the maneuver is irreversible.
    return 1u << static_cast<int>(EgoMacro::kLaneChange);
  }
  return 0u;  // arrived: terminal
}

StepResult LaneChangeEnv::step(int ego_action,
                               std::span<const double> other_actions) {
  assert(!terminal());
  if (ego_action < 0 || ego_action >= kEgoMacroCount) {
    throw std::invalid_argument("lane change step: unknown macro");
  }
  if (!((legal_ego_mask() >> ego_action) & 1u)) {
    throw std::invalid_argument("lane change step: illegal macro");
  }
  if (static_cast<int>(other_actions.size()) != other_count()) {
    throw std::invalid_argument("lane change step: wrong other-action count");
  }
  for (double a : other_actions) {
    if (a < kAccelMin - 1e-9 || a > kAccelMax + 1e-9) {
      throw std::invalid_argument(
          "lane change step: other acceleration out of range");
    }
  }

  const auto macro = static_cast<EgoMacro>(ego_action);
  const VehicleState* ego_leader =
      left_lane_leader(state_, state_.ego.s, -1, /*include_ego=*/false);
  VehicleState guarded_leader;
  if (ego_leader != nullptr) {
    guarded_leader = *ego_leader;
    if (gap_between(state_.ego, guarded_leader) < kMinPolicyGap) {
      guarded_leader.s =
          state_.ego.s + guarded_leader.length + kMinPolicyGap;
    }
    ego_leader = &guarded_leader;
  }

  double ego_accel = 0.0;
  bool advancing = false;
  switch (macro) {
    case EgoMacro::kLaneChange:
      ego_accel = idm_accel(state_.ego, ego_leader, params_.ego_params);
      advancing = true;
      break;
    case EgoMacro::kKeepMinus5: ego_accel = -5.0; break;
    case EgoMacro::kKeepMinus1: ego_accel = -1.0; break;
    case EgoMacro::kKeepZero: ego_accel = 0.0; break;
    case EgoMacro::kKeepPlus1: ego_accel = 1.0; break;
    case EgoMacro::kKeepPlus4: ego_accel = 4.0; break;
    case EgoMacro::kGapKeepIdm:
      ego_accel = idm_accel(state_.ego, ego_leader, params_.ego_params);
      break;
  }

  // Semi-implicit Euler, speeds floored at zero.
  auto integrate = [&](VehicleState& v, double a) {
    v.v = std::max(0.0, v.v + a * params_.dt);
    v.s += v.v * params_.dt;
    v.a_last = a;
  };
  integrate(state_.ego, ego_accel);
  for (int j = 0; j < other_count(); ++j) {
    integrate(state_.others[j], other_actions[j]);
  }
  if (advancing) {
    state_.ego_progress = std::min(
        1.0, state_.ego_progress + params_.dt / params_.lane_change_duration);
    if (state_.ego_progress >= 1.0) state_.ego.lane = Lane::kLeft;
  }
  ++state_.step;

  bool collision = false;
  if (ego_on_left()) {
    for (const VehicleState& o : state_.others) {
      const double gap = o.s >= state_.ego.s ? gap_between(state_.ego, o)
                                             : gap_between(o, state_.ego);
      if (gap <= 0.0) {
        collision = true;
        break;
      }
    }
  }
  const bool arrived = state_.ego_progress >= 1.0;

  StepResult result;
  if (collision) {
    outcome_ = Outcome::kCollision;
    result.ego_reward = params_.collision_reward;
  } else if (arrived) {
    outcome_ = Outcome::kSuccess;
    result.ego_reward = params_.success_reward;
  } else if (state_.step * params_.dt >= params_.time_budget - 1e-9) {
    outcome_ = Outcome::kTimeout;
  }
  result.terminal = outcome_ != Outcome::kRunning;
  result.outcome = outcome_;
  return result;
}

std::uint64_t LaneChangeEnv::state_key() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(state_.step));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.ego.s));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.ego.v));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.ego.a_last));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(state_.ego_progress));
  for (const VehicleState& o : state_.others) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(o.s));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(o.v));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(o.a_last));
  }
  return h;
}

std::string LaneChangeEnv::ego_action_label(int action) const {
  if (action < 0 || action >= kEgoMacroCount) {
    throw std::invalid_argument("lane change: unknown macro");
  }
  return to_string(static_cast<EgoMacro>(action));
}

LaneAccPolicy::LaneAccPolicy(const std::vector<std::string>& dim_names,
                             DriverParams pinned)
    : pinned_(pinned) {
  fields_.reserve(dim_names.size());
  for (const auto& name : dim_names) {
    if (name == "v_desired") {
      fields_.push_back(Field::kVDesired);
    } else if (name == "t_desired") {
      fields_.push_back(Field::kTDesired);
    } else if (name == "s_min") {
      fields_.push_back(Field::kSMin);
    } else if (name == "a_factor") {
      fields_.push_back(Field::kAFactor);
    } else if (name == "b_comf") {
      fields_.push_back(Field::kBComf);
    } else {
      throw std::invalid_argument("unknown driver dimension: " + name);
    }
  }
}

double LaneAccPolicy::act(const HistorySlice& history, int agent,
                          std::span<const double> beta) const {
  const auto& h = static_cast<const LaneHistory&>(history);
  assert(dynamic_cast<const LaneHistory*>(&history) != nullptr);
  assert(beta.size() == fields_.size());
  DriverParams p = pinned_;
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    switch (fields_[i]) {
      case Field::kVDesired: p.v_desired = beta[i]; break;
      case Field::kTDesired: p.t_desired = beta[i]; break;
      case Field::kSMin: p.s_min = beta[i]; break;
      case Field::kAFactor: p.a_factor = beta[i]; break;
      case Field::kBComf: p.b_comf = beta[i]; break;
    }
  }
  return other_agent_accel(*h.state, *h.params, agent, p);
}

LaneHypothesisSpace lane_hypothesis_space_from_string(const std::string& s) {
  if (s == "1D_Velocity") return LaneHypothesisSpace::kVelocity1D;
  if (s == "1D_Headway") return LaneHypothesisSpace::kHeadway1D;
  if (s == "2D") return LaneHypothesisSpace::kFull2D;
  throw std::invalid_argument("unknown hypothesis space kind: " + s);
}

const char* to_string(LaneHypothesisSpace k) {
  switch (k) {
    case LaneHypothesisSpace::kVelocity1D: return "1D_Velocity";
    case LaneHypothesisSpace::kHeadway1D: return "1D_Headway";
    case LaneHypothesisSpace::kFull2D: return "2D";
  }
  return "?";
}

BehaviorSpace lane_hypothesis_space(LaneHypothesisSpace kind,
                                    const DriverParamRanges& ranges) {
  std::vector<BehaviorDim> dims;
  if (kind == LaneHypothesisSpace::kVelocity1D ||
      kind == LaneHypothesisSpace::kFull2D) {
    dims.push_back({"v_desired", ranges.v_desired.lower,
                    ranges.v_desired.upper, "m/s"});
  }
  if (kind == LaneHypothesisSpace::kHeadway1D ||
      kind == LaneHypothesisSpace::kFull2D) {
    dims.push_back({"t_desired", ranges.t_desired.lower,
                    ranges.t_desired.upper, "s"});
  }
  return BehaviorSpace(std::move(dims));
}

BehaviorSpace lane_full_space_5d(const DriverParamRanges& ranges) {
  return BehaviorSpace({
      {"v_desired", ranges.v_desired.lower, ranges.v_desired.upper, "m/s"},
      {"t_desired", ranges.t_desired.lower, ranges.t_desired.upper, "s"},
      {"s_min", ranges.s_min.lower, ranges.s_min.upper, "m"},
      {"a_factor", ranges.a_factor.lower, ranges.a_factor.upper, "m/s^2"},
      {"b_comf", ranges.b_comf.lower, ranges.b_comf.upper, "m/s^2"},
  });
}

BehaviorSpace sample_behavior_box_5d(const DriverParamRanges& ranges,
                                     double delta_min, double delta_max,
                                     Rng& rng) {
  if (!(delta_min > 0.0) || delta_min > delta_max || delta_max > 1.0) {
    throw std::invalid_argument(
        "behavior box: need 0 < delta_min <= delta_max <= 1");
  }
  const BehaviorSpace full = lane_full_space_5d(ranges);
  std::vector<BehaviorDim> dims = full.dims();
  for (auto& d : dims) {
    const double range = d.upper - d.lower;
    const double width = rng.uniform(delta_min, delta_max) * range;
    const double start = rng.uniform(d.lower, d.upper - width);
    d.lower = start;
    d.upper = start + width;
  }
  return BehaviorSpace(std::move(dims));
}

std::vector<BehaviorSpace> draw_true_behaviors_5d(
    const LaneChangeParams& params, double delta_min, double delta_max,
    Rng& rng) {
  std::vector<BehaviorSpace> boxes;
  boxes.reserve(params.n_others);
  for (int j = 0; j < params.n_others; ++j) {
    boxes.push_back(
        sample_behavior_box_5d(params.ranges, delta_min, delta_max, rng));
  }
  return boxes;
}

std::vector<double> simulate_others(const LaneChangeEnv& env,
                                    const std::vector<BehaviorSpace>& boxes,
                                    Rng& rng) {
  std::vector<double> actions(env.other_count());
  for (int j = 1; j <= env.other_count(); ++j) {
    const BehaviorState beta = boxes[j - 1].sample_state(rng);
    DriverParams p;
    p.v_desired = beta[0];
    p.t_desired = beta[1];
    p.s_min = beta[2];
    p.a_factor = beta[3];
    p.b_comf = beta[4];
    p.coolness = env.params().coolness;
    actions[j - 1] = other_agent_accel(env.state(), env.params(), j, p);
  }
  return actions;
}

}  // namespace rsbg
