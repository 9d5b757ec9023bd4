#include "rsbg/belief.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsbg {

namespace {
constexpr double kSumTolerance = 1e-9;
}

BeliefState BeliefState::init(int num_agents, int k,
                              const std::vector<double>* priors) {
  if (k < 1) throw std::invalid_argument("belief init: k must be >= 1");
  if (num_agents < 0) {
    throw std::invalid_argument("belief init: num_agents must be >= 0");
  }
  BeliefState b;
  b.k_ = k;
  if (priors != nullptr) {
    if (static_cast<int>(priors->size()) != k) {
      throw std::invalid_argument("belief init: prior length must equal k");
    }
    double sum = 0.0;
    for (double p : *priors) {
      if (p < 0.0) throw std::invalid_argument("belief init: negative prior");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("belief init: prior must sum to 1");
    }
    b.priors_ = *priors;
  } else {
    b.priors_.assign(k, 1.0 / k);
  }
  b.posterior_.assign(num_agents, b.priors_);
  b.likelihood_sums_.assign(num_agents, std::vector<double>(k, 0.0));
  b.update_counts_.assign(num_agents, 0);
  return b;
}

std::span<const double> BeliefState::posterior(int agent) const {
  if (agent < 0 || agent >= num_agents()) {
    throw std::invalid_argument("belief: unknown agent id");
  }
  return posterior_[agent];
}

std::span<const double> BeliefState::likelihood_sums(int agent) const {
  if (agent < 0 || agent >= num_agents()) {
    throw std::invalid_argument("belief: unknown agent id");
  }
  return likelihood_sums_[agent];
}

int BeliefState::update_count(int agent) const {
  if (agent < 0 || agent >= num_agents()) {
    throw std::invalid_argument("belief: unknown agent id");
  }
  return update_counts_[agent];
}

int BeliefState::step_count() const {
  int steps = 0;
  for (int c : update_counts_) steps = std::max(steps, c);
  return steps;
}

void BeliefState::apply_step(int agent, std::span<const double> likelihoods,
                             ZeroLikelihoodFallback fallback) {
  if (agent < 0 || agent >= num_agents()) {
    throw std::invalid_argument("belief: unknown agent id");
  }
  if (static_cast<int>(likelihoods.size()) != k_) {
    throw std::invalid_argument("belief: likelihood vector length must be K");
  }
  ++update_counts_[agent];
  auto& sums = likelihood_sums_[agent];
  for (int i = 0; i < k_; ++i) sums[i] += likelihoods[i];
  if (k_ == 1) {
    posterior_[agent][0] = 1.0;
    return;
  }
  double norm = 0.0;
  for (int i = 0; i < k_; ++i) norm += sums[i] * priors_[i];
  if (norm <= 0.0) {
    if (fallback == ZeroLikelihoodFallback::kPrior) posterior_[agent] = priors_;
    return;  // kPrevious keeps the posterior as is
  }
  for (int i = 0; i < k_; ++i) {
    posterior_[agent][i] = sums[i] * priors_[i] / norm;
  }
}

std::vector<int> BeliefState::sample_joint_type(Rng& rng) const {
  std::vector<int> types(posterior_.size());
  for (std::size_t j = 0; j < posterior_.size(); ++j) {
    types[j] = rng.categorical(posterior_[j]);
  }
  return types;
}

BeliefState update(BeliefState belief, int agent, double observed_action,
                   const HistorySlice& history,
                   std::span<const Hypothesis> hypotheses,
                   const BeliefUpdateConfig& cfg, Rng& rng) {
  if (agent < 0 || agent >= belief.num_agents()) {
    throw std::invalid_argument("belief update: unknown agent id");
  }
  if (static_cast<int>(hypotheses.size()) != belief.k()) {
    throw std::invalid_argument(
        "belief update: hypothesis count must match the belief dimension");
  }
  if (belief.k() == 1) {
    // Single hypothesis: the posterior is pinned at [1], skip estimation.
    belief.apply_step(agent, std::vector<double>{1.0}, cfg.fallback);
    return belief;
  }
  std::vector<double> lik(hypotheses.size());
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    lik[i] = hypotheses[i].action_likelihood(history, agent, observed_action,
                                             cfg.m_samples, cfg.tolerance, rng);
  }
  belief.apply_step(agent, lik, cfg.fallback);
  return belief;
}

double normalized_belief_std(const BeliefState& belief) {
  const int n = belief.num_agents() * belief.k();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (int j = 0; j < belief.num_agents(); ++j) {
    for (double p : belief.posterior(j)) mean += p;
  }
  mean /= n;
  double var = 0.0;
  for (int j = 0; j < belief.num_agents(); ++j) {
    for (double p : belief.posterior(j)) var += (p - mean) * (p - mean);
  }
  var /= n;
  return std::sqrt(var) * belief.k();
}

}  // namespace rsbg
