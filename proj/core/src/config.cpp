#include "rsbg/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rsbg {

using nlohmann::ordered_json;

const char* to_string(DomainKind d) {
  return d == DomainKind::kCrossing ? "crossing" : "lanechange";
}

DomainKind domain_from_string(const std::string& s) {
  if (s == "crossing") return DomainKind::kCrossing;
  if (s == "lanechange" || s == "lane_change") return DomainKind::kLaneChange;
  throw std::invalid_argument("unknown domain: " + s);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  if (trials < 1) errors.push_back("trials: must be >= 1");
  if (planners.empty()) errors.push_back("planners: must not be empty");
  for (std::size_t i = 0; i < planners.size(); ++i) {
    const std::string path = "planners[" + std::to_string(i) + "]";
    const PlannerSpec& p = planners[i];
    if (p.name.empty()) errors.push_back(path + ".name: must not be empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (planners[j].name == p.name) {
        errors.push_back(path + ".name: duplicate planner name");
      }
    }
    if (p.k < 1) errors.push_back(path + ".k: must be >= 1");
    try {
      p.search.validate();
    } catch (const std::invalid_argument& e) {
      errors.push_back(path + ": " + e.what());
    }
  }
  if (metrics.belief_std_steps < 1) {
    errors.push_back("metrics.belief_std_steps: must be >= 1");
  }
  if (metrics.belief_std_trials < 1) {
    errors.push_back("metrics.belief_std_trials: must be >= 1");
  }
  if (belief.m_samples < 1) errors.push_back("belief.m_samples: must be >= 1");
  try {
    crossing.params.validate();
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("crossing: ") + e.what());
  }
  try {
    lane_change.params.validate();
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("lane_change: ") + e.what());
  }
  if (!(lane_change.delta_min > 0.0) ||
      lane_change.delta_min > lane_change.delta_max ||
      lane_change.delta_max > 1.0) {
    errors.push_back(
        "lane_change.delta_min/delta_max: need 0 < delta_min <= delta_max "
        "<= 1");
  }
  if (!errors.empty()) {
    std::string joined = "invalid experiment config:";
    for (const auto& e : errors) joined += "\n  " + e;
    throw std::invalid_argument(joined);
  }
}

double ExperimentConfig::resolved_tolerance() const {
  if (belief.tolerance > 0.0) return belief.tolerance;
  if (domain == DomainKind::kCrossing) {
    const auto& p = crossing.params;
    return 0.1 * (p.max_velocity - p.min_velocity);
  }
  return 0.1 * (kAccelMax - kAccelMin);
}

namespace {

ParamRange range_from(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument(path + ": expected [lower, upper]");
  }
  return ParamRange{j[0].get<double>(), j[1].get<double>()};
}

ordered_json range_to(const ParamRange& r) {
  return ordered_json::array({r.lower, r.upper});
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->get<T>();
  }
}

PlannerSpec planner_from_json(const ordered_json& j, const std::string& path) {
  PlannerSpec spec;
  if (!j.contains("name")) {
    throw std::invalid_argument(path + ".name: required");
  }
  spec.name = j.at("name").get<std::string>();
  if (!j.contains("mode")) {
    throw std::invalid_argument(path + ".mode: required");
  }
  spec.search.mode = planner_mode_from_string(j.at("mode").get<std::string>());
  read_field(j, "k", spec.k);
  read_field(j, "iterations", spec.search.iterations);
  read_field(j, "gamma", spec.search.gamma);
  read_field(j, "k0", spec.search.k0);
  read_field(j, "alpha0", spec.search.alpha0);
  read_field(j, "ucb_c", spec.search.ucb_c);
  read_field(j, "max_depth", spec.search.max_depth);
  read_field(j, "rollout_depth", spec.search.rollout_depth);
  read_field(j, "action_key_resolution", spec.search.action_key_resolution);
  read_field(j, "seed", spec.search.seed);
  if (auto it = j.find("hypothesis_space"); it != j.end()) {
    spec.lane_space =
        lane_hypothesis_space_from_string(it->get<std::string>());
  }
  return spec;
}

ordered_json planner_to_json(const PlannerSpec& spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["mode"] = to_string(spec.search.mode);
  j["k"] = spec.k;
  j["iterations"] = spec.search.iterations;
  j["gamma"] = spec.search.gamma;
  j["k0"] = spec.search.k0;
  j["alpha0"] = spec.search.alpha0;
  j["ucb_c"] = spec.search.ucb_c;
  j["max_depth"] = spec.search.max_depth;
  j["rollout_depth"] = spec.search.rollout_depth;
  j["action_key_resolution"] = spec.search.action_key_resolution;
  j["seed"] = spec.search.seed;
  j["hypothesis_space"] = to_string(spec.lane_space);
  return j;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  ExperimentConfig cfg;
  if (!j.contains("domain")) {
    throw std::invalid_argument("domain: required");
  }
  cfg.domain = domain_from_string(j.at("domain").get<std::string>());
  read_field(j, "trials", cfg.trials);
  read_field(j, "master_seed", cfg.master_seed);
  read_field(j, "output_dir", cfg.output_dir);

  if (auto it = j.find("metrics"); it != j.end()) {
    read_field(*it, "belief_std_steps", cfg.metrics.belief_std_steps);
    read_field(*it, "belief_std_trials", cfg.metrics.belief_std_trials);
    read_field(*it, "trace", cfg.metrics.trace);
  }
  if (auto it = j.find("belief"); it != j.end()) {
    read_field(*it, "m_samples", cfg.belief.m_samples);
    if (auto t = it->find("tolerance"); t != it->end() && !t->is_null()) {
      cfg.belief.tolerance = t->get<double>();
    } else {
      cfg.belief.tolerance = 0.0;  // domain default
    }
    if (auto f = it->find("zero_fallback"); f != it->end()) {
      const std::string s = f->get<std::string>();
      if (s == "prior") {
        cfg.belief.fallback = ZeroLikelihoodFallback::kPrior;
      } else if (s == "previous") {
        cfg.belief.fallback = ZeroLikelihoodFallback::kPrevious;
      } else {
        throw std::invalid_argument("belief.zero_fallback: 'prior' or "
                                    "'previous'");
      }
    }
  } else {
    cfg.belief.tolerance = 0.0;
  }

  if (auto it = j.find("crossing"); it != j.end()) {
    auto& p = cfg.crossing.params;
    read_field(*it, "n_agents", p.n_agents);
    read_field(*it, "max_steps", p.max_steps);
    read_field(*it, "x_intersect", p.x_intersect);
    read_field(*it, "x_goal", p.x_goal);
    read_field(*it, "initial_position", p.initial_position);
    read_field(*it, "chain_min", p.chain_min);
    read_field(*it, "chain_max", p.chain_max);
    read_field(*it, "min_velocity", p.min_velocity);
    read_field(*it, "max_velocity", p.max_velocity);
    read_field(*it, "ego_actions", p.ego_actions);
    if (auto v = it->find("true_space"); v != it->end()) {
      cfg.crossing.variant =
          true_space_variant_from_string(v->get<std::string>());
    }
  }

  if (auto it = j.find("lane_change"); it != j.end()) {
    auto& p = cfg.lane_change.params;
    read_field(*it, "n_others", p.n_others);
    read_field(*it, "dt", p.dt);
    read_field(*it, "time_budget", p.time_budget);
    read_field(*it, "lane_change_duration", p.lane_change_duration);
    read_field(*it, "vehicle_length", p.vehicle_length);
    read_field(*it, "coolness", p.coolness);
    read_field(*it, "delta_min", cfg.lane_change.delta_min);
    read_field(*it, "delta_max", cfg.lane_change.delta_max);
    if (auto g = it->find("initial_gap"); g != it->end()) {
      p.initial_gap = range_from(*g, "lane_change.initial_gap");
    }
    if (auto s = it->find("initial_speed"); s != it->end()) {
      p.initial_speed = range_from(*s, "lane_change.initial_speed");
    }
    if (auto r = it->find("ranges"); r != it->end()) {
      if (auto f = r->find("v_desired"); f != r->end())
        p.ranges.v_desired = range_from(*f, "lane_change.ranges.v_desired");
      if (auto f = r->find("t_desired"); f != r->end())
        p.ranges.t_desired = range_from(*f, "lane_change.ranges.t_desired");
      if (auto f = r->find("s_min"); f != r->end())
        p.ranges.s_min = range_from(*f, "lane_change.ranges.s_min");
      if (auto f = r->find("a_factor"); f != r->end())
        p.ranges.a_factor = range_from(*f, "lane_change.ranges.a_factor");
      if (auto f = r->find("b_comf"); f != r->end())
        p.ranges.b_comf = range_from(*f, "lane_change.ranges.b_comf");
    }
    p.ego_params = p.ranges.center(p.coolness);
  }

  if (!j.contains("planners") || !j.at("planners").is_array()) {
    throw std::invalid_argument("planners: required array");
  }
  for (std::size_t i = 0; i < j.at("planners").size(); ++i) {
    cfg.planners.push_back(planner_from_json(
        j.at("planners")[i], "planners[" + std::to_string(i) + "]"));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["domain"] = to_string(cfg.domain);
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["metrics"] = {{"belief_std_steps", cfg.metrics.belief_std_steps},
                  {"belief_std_trials", cfg.metrics.belief_std_trials},
                  {"trace", cfg.metrics.trace}};
  j["belief"] = {
      {"m_samples", cfg.belief.m_samples},
      {"tolerance", cfg.resolved_tolerance()},
      {"zero_fallback",
       cfg.belief.fallback == ZeroLikelihoodFallback::kPrior ? "prior"
                                                             : "previous"}};
  {
    const auto& p = cfg.crossing.params;
    j["crossing"] = {{"n_agents", p.n_agents},
                     {"true_space", to_string(cfg.crossing.variant)},
                     {"max_steps", p.max_steps},
                     {"x_intersect", p.x_intersect},
                     {"x_goal", p.x_goal},
                     {"initial_position", p.initial_position},
                     {"chain_min", p.chain_min},
                     {"chain_max", p.chain_max},
                     {"min_velocity", p.min_velocity},
                     {"max_velocity", p.max_velocity},
                     {"ego_actions", p.ego_actions}};
  }
  {
    const auto& p = cfg.lane_change.params;
    j["lane_change"] = {{"n_others", p.n_others},
                        {"dt", p.dt},
                        {"time_budget", p.time_budget},
                        {"lane_change_duration", p.lane_change_duration},
                        {"vehicle_length", p.vehicle_length},
                        {"coolness", p.coolness},
                        {"delta_min", cfg.lane_change.delta_min},
                        {"delta_max", cfg.lane_change.delta_max},
                        {"initial_gap", range_to(p.initial_gap)},
                        {"initial_speed", range_to(p.initial_speed)},
                        {"ranges",
                         {{"v_desired", range_to(p.ranges.v_desired)},
                          {"t_desired", range_to(p.ranges.t_desired)},
                          {"s_min", range_to(p.ranges.s_min)},
                          {"a_factor", range_to(p.ranges.a_factor)},
                          {"b_comf", range_to(p.ranges.b_comf)}}}};
  }
  j["planners"] = ordered_json::array();
  for (const auto& spec : cfg.planners) {
    j["planners"].push_back(planner_to_json(spec));
  }
  return j.dump(2);
}

}  // namespace rsbg
