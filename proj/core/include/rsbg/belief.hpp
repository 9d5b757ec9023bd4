#pragma once

#include <span>
#include <vector>

#include "rsbg/behavior_space.hpp"
#include "rsbg/rng.hpp"

namespace rsbg {

// What to do when every hypothesis assigns zero accumulated likelihood.
enum class ZeroLikelihoodFallback { kPrior, kPrevious };

struct BeliefUpdateConfig {
  int m_samples = 100;        // Monte-Carlo draws per likelihood estimate
  double tolerance = 1.0;     // action-space tolerance of the estimate
  ZeroLikelihoodFallback fallback = ZeroLikelihoodFallback::kPrior;
};

// Per-agent posterior over K hypotheses, tracked with the sum posterior:
// the likelihood of a hypothesis is the running sum of its per-step action
// likelihoods (the 1/t time-average factor is common to all hypotheses and
// cancels in normalization). Zero-probability observations therefore reduce
// no hypothesis to zero on their own.
class BeliefState {
 public:
  // Uniform prior unless one is given. Throws std::invalid_argument on
  // k < 1, num_agents < 0 or an invalid prior (wrong length, negative
  // entries, or sum != 1 within 1e-9).
  static BeliefState init(int num_agents, int k,
                          const std::vector<double>* priors = nullptr);

  int num_agents() const { return static_cast<int>(posterior_.size()); }
  int k() const { return k_; }
  const std::vector<double>& priors() const { return priors_; }
  std::span<const double> posterior(int agent) const;
  std::span<const double> likelihood_sums(int agent) const;
  int update_count(int agent) const;
  // Steps observed so far (agents update once per environment step).
  int step_count() const;

  // Folds one per-hypothesis likelihood vector into the agent's running
  // sums and rebuilds its posterior: post_k ~ sum_k * prior_k, normalized.
  // A zero normalizer falls back per `fallback`. K=1 is a no-op on [1].
  void apply_step(int agent, std::span<const double> likelihoods,
                  ZeroLikelihoodFallback fallback = ZeroLikelihoodFallback::kPrior);

  // One independent categorical draw per agent from its posterior.
  std::vector<int> sample_joint_type(Rng& rng) const;

 private:
  int k_ = 1;
  std::vector<double> priors_;
  std::vector<std::vector<double>> posterior_;
  std::vector<std::vector<double>> likelihood_sums_;
  std::vector<int> update_counts_;
};

// Estimates the observed action's likelihood under every hypothesis and
// returns the belief with the agent's posterior updated. Agents are indexed
// 0..num_agents-1. Throws std::invalid_argument on an unknown agent or a
// hypothesis count mismatch.
BeliefState update(BeliefState belief, int agent, double observed_action,
                   const HistorySlice& history,
                   std::span<const Hypothesis> hypotheses,
                   const BeliefUpdateConfig& cfg, Rng& rng);

// Population standard deviation of all posterior entries across agents and
// hypotheses, normalized by the uniform-prior entry 1/K. Uniform beliefs
// score 0; the score is comparable across K.
double normalized_belief_std(const BeliefState& belief);

}  // namespace rsbg
