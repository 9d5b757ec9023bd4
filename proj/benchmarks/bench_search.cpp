#include <benchmark/benchmark.h>

#include "rsbg/belief.hpp"
#include "rsbg/crossing.hpp"
#include "rsbg/lane_change.hpp"
#include "rsbg/search.hpp"

namespace {

using namespace rsbg;

void BM_CrossingPlan(benchmark::State& state) {
  CrossingParams params;
  CrossingEnv env(params);
  const auto policy = std::make_shared<CrossingGapPolicy>();
  const int k = static_cast<int>(state.range(1));
  const HypothesisSets hyps = shared_hypothesis_sets(
      partition_equal(expert_full_space(), std::vector<int>{k})
          .hypotheses(policy),
      env.other_count());
  const BeliefState belief = BeliefState::init(env.other_count(), k);
  PlannerConfig cfg;
  cfg.iterations = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(plan(env, belief, hyps, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_CrossingPlan)
    ->Args({500, 16})
    ->Args({2000, 16})
    ->Args({2000, 32})
    ->Unit(benchmark::kMillisecond);

void BM_LaneChangePlan(benchmark::State& state) {
  LaneChangeParams params;
  Rng scen_rng(7);
  LaneChangeEnv env = LaneChangeEnv::sample_scenario(params, scen_rng);
  const DriverParams pinned = params.ranges.center(params.coolness);
  const auto policy = std::make_shared<LaneAccPolicy>(
      std::vector<std::string>{"v_desired"}, pinned);
  const BehaviorSpace space =
      lane_hypothesis_space(LaneHypothesisSpace::kVelocity1D, params.ranges);
  const HypothesisSets hyps = shared_hypothesis_sets(
      partition_equal(space, std::vector<int>{16}).hypotheses(policy),
      env.other_count());
  const BeliefState belief = BeliefState::init(env.other_count(), 16);
  PlannerConfig cfg;
  cfg.iterations = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(plan(env, belief, hyps, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_LaneChangePlan)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_BeliefUpdate(benchmark::State& state) {
  CrossingParams params;
  CrossingEnv env(params);
  const auto policy = std::make_shared<CrossingGapPolicy>();
  const int k = static_cast<int>(state.range(0));
  const auto hyps = partition_equal(expert_full_space(), std::vector<int>{k})
                        .hypotheses(policy);
  BeliefUpdateConfig cfg;
  cfg.tolerance = 1.0;
  BeliefState belief = BeliefState::init(env.other_count(), k);
  Rng rng(3);
  for (auto _ : state) {
    for (int j = 0; j < env.other_count(); ++j) {
      belief = update(std::move(belief), j, -1.5, env.history(), hyps, cfg,
                      rng);
    }
  }
  state.SetItemsProcessed(state.iterations() * env.other_count() * k *
                          cfg.m_samples);
}
BENCHMARK(BM_BeliefUpdate)->Arg(16)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_AccModel(benchmark::State& state) {
  DriverParams p;
  VehicleState follower;
  follower.v = 13.0;
  VehicleState leader;
  leader.s = 30.0;
  leader.v = 11.0;
  leader.a_last = 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(acc_accel(follower, &leader, p));
  }
}
BENCHMARK(BM_AccModel);

}  // namespace

BENCHMARK_MAIN();
