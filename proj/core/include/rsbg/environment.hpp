#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "rsbg/behavior_space.hpp"
#include "rsbg/rng.hpp"

namespace rsbg {

enum class Outcome { kRunning, kSuccess, kCollision, kTimeout };

const char* to_string(Outcome o);

struct StepResult {
  double ego_reward = 0.0;
  bool terminal = false;
  Outcome outcome = Outcome::kRunning;
};

// A cloneable multi-agent world with deterministic joint transitions.
// Agent 0 is the controlled agent; agents 1..agent_count()-1 are the modeled
// other agents, whose actions are real scalars. The controlled agent picks
// from a small discrete action set addressed by index.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::unique_ptr<Environment> clone() const = 0;

  virtual int agent_count() const = 0;
  int other_count() const { return agent_count() - 1; }

  virtual int ego_action_count() const = 0;

  // Bit i set iff ego action i is legal in the current state. At most 32
  // ego actions.
  virtual std::uint32_t legal_ego_mask() const = 0;

  // Advances the world by one joint step. other_actions has
  // agent_count()-1 entries, indexed by agent-1. Must not be called on a
  // terminal state.
  virtual StepResult step(int ego_action,
                          std::span<const double> other_actions) = 0;

  virtual bool terminal() const = 0;

  // The observation slice hypothetical policies condition on; always
  // reflects the current state of this instance.
  virtual const HistorySlice& history() const = 0;

  // Hash of the observable state, used as a cross-check on node identity.
  virtual std::uint64_t state_key() const = 0;

  virtual std::string ego_action_label(int action) const = 0;

  // Ego action played beyond the tree frontier. Defaults to a uniform draw
  // over the legal set; domains may override with an informed playout
  // policy (shared by every planner mode, so comparisons stay paired).
  virtual int rollout_ego_action(Rng& rng) const {
    const std::uint32_t mask = legal_ego_mask();
    int pick = static_cast<int>(rng.uniform_index(std::popcount(mask)));
    for (int a = 0; a < 32; ++a) {
      if ((mask >> a) & 1u) {
        if (pick == 0) return a;
        --pick;
      }
    }
    return 0;
  }
};

}  // namespace rsbg
