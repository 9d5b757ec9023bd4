#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsbg/belief.hpp"
#include "rsbg/crossing.hpp"
#include "rsbg/lane_change.hpp"
#include "rsbg/search.hpp"

namespace rsbg {

enum class DomainKind { kCrossing, kLaneChange };
const char* to_string(DomainKind d);
DomainKind domain_from_string(const std::string& s);

struct MetricOptions {
  int belief_std_steps = 10;   // curve length (steps from the episode start)
  int belief_std_trials = 10;  // trials averaged into the curve
  bool trace = false;          // keep per-step structured traces
};

// One planner entry of an experiment. `k` counts partition cells per
// hypothesis-space dimension (modes with a single hypothesis ignore it).
struct PlannerSpec {
  std::string name;
  PlannerConfig search;
  int k = 16;
  LaneHypothesisSpace lane_space = LaneHypothesisSpace::kVelocity1D;
};

struct CrossingConfig {
  CrossingParams params;
  TrueSpaceVariant variant = TrueSpaceVariant::kSymmetric;
};

struct LaneChangeConfig {
  LaneChangeParams params;
  double delta_min = 0.1;
  double delta_max = 0.4;
};

struct ExperimentConfig {
  DomainKind domain = DomainKind::kCrossing;
  std::vector<PlannerSpec> planners;
  int trials = 100;
  std::uint64_t master_seed = 0;
  std::string output_dir = "results";
  MetricOptions metrics;
  // tolerance <= 0 means the domain default (10% of the action range)
  BeliefUpdateConfig belief{100, 0.0, ZeroLikelihoodFallback::kPrior};
  CrossingConfig crossing;
  LaneChangeConfig lane_change;

  // Throws std::invalid_argument listing every offending field path.
  void validate() const;

  // The belief tolerance actually used: configured value, or 10% of the
  // domain's action range.
  double resolved_tolerance() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical serialization with all defaults resolved; the echo embedded in
// result files.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace rsbg
