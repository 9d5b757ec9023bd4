#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsbg/behavior_space.hpp"
#include "rsbg/environment.hpp"
#include "rsbg/rng.hpp"

namespace rsbg {

enum class Lane : std::uint8_t { kRight, kLeft };

// Longitudinal vehicle state. `s` is the front-bumper position, so the gap
// to a leader is leader.s - leader.length - follower.s.
struct VehicleState {
  Lane lane = Lane::kLeft;
  double s = 0.0;       // m
  double v = 0.0;       // m/s, never negative
  double a_last = 0.0;  // m/s^2, acceleration applied in the last step
  double length = 5.0;  // m
};

// Car-following parameters of one driver.
struct DriverParams {
  double v_desired = 15.0;  // m/s
  double t_desired = 1.75;  // s
  double s_min = 1.75;      // m
  double a_factor = 1.75;   // m/s^2
  double b_comf = 2.25;     // m/s^2 (positive magnitude)
  double coolness = 0.99;   // [0, 1]
};

struct ParamRange {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds of the 5-D simulated behavior space. Defaults are configurable
// stand-ins; result reports echo the ranges used.
struct DriverParamRanges {
  ParamRange v_desired{10.0, 20.0};
  ParamRange t_desired{0.5, 3.0};
  ParamRange s_min{0.5, 3.0};
  ParamRange a_factor{0.5, 3.0};
  ParamRange b_comf{0.5, 4.0};

  DriverParams center(double coolness) const;
};

inline constexpr double kAccelMin = -5.0;  // physical limits, m/s^2
inline constexpr double kAccelMax = 8.0;

// Intelligent-driver-model acceleration toward an optional leader:
//   a = a_factor * (1 - (v/v_desired)^4 - (s*/gap)^2)
//   s* = s_min + max(0, v*T + v*dv / (2*sqrt(a_factor*b_comf)))
// Requires a positive gap when a leader is present. Clamped to [-5, 8].
double idm_accel(const VehicleState& follower, const VehicleState* leader,
                 const DriverParams& p);

// Constant-acceleration heuristic; assumes the follower roughly adopts the
// leader's acceleration (leader.a_last). Requires a positive gap. Clamped.
double cah_accel(const VehicleState& follower, const VehicleState& leader,
                 const DriverParams& p);

// Coolness-weighted blend of IDM and CAH:
//   a_IDM                                     if a_IDM >= a_CAH
//   (1-c)*a_IDM + c*(a_CAH + b*tanh((a_IDM - a_CAH)/b))  otherwise
// Without a leader this is plain IDM. Clamped.
double acc_accel(const VehicleState& follower, const VehicleState* leader,
                 const DriverParams& p);

// Discrete macro actions of the controlled agent.
enum class EgoMacro : int {
  kLaneChange = 0,
  kKeepMinus5,
  kKeepMinus1,
  kKeepZero,
  kKeepPlus1,
  kKeepPlus4,
  kGapKeepIdm,
};
inline constexpr int kEgoMacroCount = 7;
const char* to_string(EgoMacro m);

struct LaneChangeParams {
  int n_others = 4;
  double dt = 0.2;                   // s
  double lane_change_duration = 1.0; // s
  double time_budget = 7.5;          // s
  double vehicle_length = 5.0;       // m
  DriverParamRanges ranges;
  double coolness = 0.99;
  ParamRange initial_gap{8.0, 20.0};   // m, between platoon vehicles
  ParamRange initial_speed{10.0, 15.0};  // m/s
  DriverParams ego_params;  // used by the ego's IDM-based macros
  double collision_reward = -1000.0;
  double success_reward = 100.0;

  void validate() const;
};

// Other vehicles live on the left lane; the ego starts on the right and is
// done once its lateral progress reaches 1.
struct LaneChangeState {
  VehicleState ego;
  double ego_progress = 0.0;  // 0 on the right, 1 arrived on the left
  std::vector<VehicleState> others;
  int step = 0;
};

struct LaneHistory final : public HistorySlice {
  const LaneChangeState* state = nullptr;
  const LaneChangeParams* params = nullptr;
};

class LaneChangeEnv final : public Environment {
 public:
  LaneChangeEnv(LaneChangeParams params, LaneChangeState initial);
  LaneChangeEnv(const LaneChangeEnv& other);
  LaneChangeEnv& operator=(const LaneChangeEnv& other);

  // Draws platoon gaps, speeds, and the ego offset from the configured
  // uniform ranges. The result is collision-free.
  static LaneChangeEnv sample_scenario(const LaneChangeParams& params,
                                       Rng& rng);

  std::unique_ptr<Environment> clone() const override;
  int agent_count() const override { return params_.n_others + 1; }
  int ego_action_count() const override { return kEgoMacroCount; }
  std::uint32_t legal_ego_mask() const override;
  StepResult step(int ego_action,
                  std::span<const double> other_actions) override;
  bool terminal() const override { return outcome_ != Outcome::kRunning; }
  const HistorySlice& history() const override { return history_; }
  std::uint64_t state_key() const override;
  std::string ego_action_label(int action) const override;

  const LaneChangeState& state() const { return state_; }
  const LaneChangeParams& params() const { return params_; }
  Outcome outcome() const { return outcome_; }

  // True once the ego counts as an interaction partner on the left lane.
  bool ego_on_left() const { return state_.ego_progress >= 0.5; }

 private:
  LaneChangeParams params_;
  LaneChangeState state_;
  Outcome outcome_ = Outcome::kRunning;
  LaneHistory history_;
};

// ACC acceleration of other agent `agent` (1-based env id) in the given
// world, with the ego joining the left lane as a leader once its progress
// passes 0.5. This one function backs both the simulator and the
// hypothetical policy.
double other_agent_accel(const LaneChangeState& state,
                         const LaneChangeParams& params, int agent,
                         const DriverParams& driver);

// Hypothetical policy: ACC with the named behavior dimensions taken from
// beta and every other parameter pinned.
class LaneAccPolicy final : public HypotheticalPolicy {
 public:
  LaneAccPolicy(const std::vector<std::string>& dim_names,
                DriverParams pinned);
  double act(const HistorySlice& history, int agent,
             std::span<const double> beta) const override;

 private:
  enum class Field { kVDesired, kTDesired, kSMin, kAFactor, kBComf };
  std::vector<Field> fields_;
  DriverParams pinned_;
};

enum class LaneHypothesisSpace { kVelocity1D, kHeadway1D, kFull2D };
LaneHypothesisSpace lane_hypothesis_space_from_string(const std::string& s);
const char* to_string(LaneHypothesisSpace k);

// The hypothesis behavior space over the key driver parameters; non-varied
// parameters are pinned to their range centers by the policy.
BehaviorSpace lane_hypothesis_space(LaneHypothesisSpace kind,
                                    const DriverParamRanges& ranges);

// The full 5-D simulated behavior space (coolness stays fixed).
BehaviorSpace lane_full_space_5d(const DriverParamRanges& ranges);

// One per-trial behavior box: per dimension a width drawn uniformly from
// [delta_min, delta_max] of the full range, placed uniformly inside it.
// Throws std::invalid_argument unless 0 < delta_min <= delta_max <= 1.
BehaviorSpace sample_behavior_box_5d(const DriverParamRanges& ranges,
                                     double delta_min, double delta_max,
                                     Rng& rng);

std::vector<BehaviorSpace> draw_true_behaviors_5d(
    const LaneChangeParams& params, double delta_min, double delta_max,
    Rng& rng);

// One simulation step of the other vehicles: fresh 5-D behavior draw per
// vehicle, ACC acceleration toward its current leader.
std::vector<double> simulate_others(const LaneChangeEnv& env,
                                    const std::vector<BehaviorSpace>& boxes,
                                    Rng& rng);

}  // namespace rsbg
