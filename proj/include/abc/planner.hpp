#pragma once

// Decentralized MCTS agent: one robot searches over its own 5 actions while
// every teammate's action inside the simulator comes from a teammate model.

#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abc/errors.hpp"
#include "abc/factory_floor.hpp"
#include "abc/mcts.hpp"
#include "abc/policy.hpp"

namespace abc {

/// Single-agent view of the floor for `agent`, with teammates folded into the
/// dynamics. Rewards include the do-it-yourself bonus for the agent's own
/// removals. Deterministic model outputs are memoized per state.
class ProjectedFloor {
 public:
  using State = GridState;

  /// `teammates` has one entry per agent; the entry for `agent` is ignored.
  ProjectedFloor(const DomainSpec& spec, std::size_t agent, std::vector<PolicyHandle> teammates,
                 PolicyHandle rollout_policy, double diy_bonus)
      : spec_(spec),
        agent_(agent),
        teammates_(std::move(teammates)),
        rollout_(std::move(rollout_policy)),
        bonus_(diy_bonus) {
    if (teammates_.size() != spec.n_agents())
      throw ArgumentError("teammate model list must have one slot per agent");
    if (agent_ >= spec.n_agents()) throw ArgumentError("agent index out of range");
    for (std::size_t j = 0; j < teammates_.size(); ++j)
      if (j != agent_ && !teammates_[j]) throw ArgumentError("missing teammate model");
    if (!rollout_) throw ArgumentError("missing rollout policy");
    cacheable_ = rollout_->deterministic();
    for (std::size_t j = 0; j < teammates_.size(); ++j)
      if (j != agent_ && !teammates_[j]->deterministic()) cacheable_ = false;
  }

  std::size_t num_actions() const noexcept { return kNumActions; }
  bool terminal(const State& s) const noexcept { return s.time >= spec_.horizon; }
  double remaining(const State& s) const noexcept { return static_cast<double>(spec_.horizon - s.time); }
  double discount() const noexcept { return spec_.discount; }
  std::size_t agent() const noexcept { return agent_; }
  const DomainSpec& spec() const noexcept { return spec_; }

  std::pair<State, double> transition(const State& s, std::size_t a, Rng& rng) {
    JointAction joint = model_actions(s, rng);
    joint[agent_] = action_from_index(a);
    StepOutcome out = step(s, joint, spec_, rng);
    return {std::move(out.next), out.reward + bonus_ * out.removed_by[agent_]};
  }

  /// Plays to the horizon with the rollout policy for the agent.
  double rollout(const State& start, Rng& rng) {
    double total = 0.0;
    double disc = 1.0;
    State s = start;
    while (s.time < spec_.horizon) {
      JointAction joint = model_actions(s, rng);
      StepOutcome out = step(s, joint, spec_, rng);
      total += disc * (out.reward + bonus_ * out.removed_by[agent_]);
      disc *= spec_.discount;
      s = std::move(out.next);
    }
    return total;
  }

  std::size_t cache_size() const noexcept { return cache_.size(); }

 private:
  using JointAction = std::vector<Action>;

  /// Teammate model actions, with the agent's slot holding the rollout action.
  JointAction model_actions(const State& s, Rng& rng) {
    if (cacheable_) {
      if (auto it = cache_.find(s); it != cache_.end()) return it->second;
    }
    JointAction joint(spec_.n_agents());
    for (std::size_t j = 0; j < joint.size(); ++j)
      joint[j] = j == agent_ ? rollout_->act(s, j, rng) : teammates_[j]->act(s, j, rng);
    if (cacheable_) {
      if (cache_.size() >= kMaxCache) cache_.clear();
      cache_.emplace(s, joint);
    }
    return joint;
  }

  static constexpr std::size_t kMaxCache = 1u << 18;

  const DomainSpec& spec_;
  std::size_t agent_;
  std::vector<PolicyHandle> teammates_;
  PolicyHandle rollout_;
  double bonus_;
  bool cacheable_ = true;
  std::unordered_map<GridState, JointAction, GridStateHash> cache_;
};

static_assert(SearchSimulator<ProjectedFloor>);

/// Return of one simulated completion of the episode from `state`, with the
/// agent following `rollout_policy` and teammates following their models.
inline double rollout_return(const GridState& state, std::size_t agent, const DomainSpec& spec,
                             const PolicyHandle& rollout_policy,
                             const std::vector<PolicyHandle>& teammate_models, const MctsParams& params,
                             Rng& rng) {
  ProjectedFloor sim(spec, agent, teammate_models, rollout_policy, params.diy_bonus);
  return sim.rollout(state, rng);
}

/// Runs a fresh search from `root` and returns the greedy root action.
inline Action plan_action(const GridState& root, std::size_t agent, const DomainSpec& spec,
                          const std::vector<PolicyHandle>& teammate_models,
                          const PolicyHandle& rollout_policy, const MctsParams& params, Rng& rng) {
  if (root.time >= spec.horizon) throw EpisodeOverError("plan_action: state at horizon");
  ProjectedFloor sim(spec, agent, teammate_models, rollout_policy, params.diy_bonus);
  SparseUct<ProjectedFloor> uct(sim, params);
  return action_from_index(uct.search(root, rng));
}

/// MCTS agent for one robot; its configuration is (teammate models, rollout
/// model, search parameters).
class MctsPolicy final : public Policy {
 public:
  MctsPolicy(DomainSpec spec, std::size_t agent, std::vector<PolicyHandle> teammates,
             PolicyHandle rollout, MctsParams params)
      : spec_(std::move(spec)),
        agent_(agent),
        teammates_(std::move(teammates)),
        rollout_(std::move(rollout)),
        params_(params) {
    validate(params_);
  }

  PolicyKind kind() const noexcept override { return PolicyKind::Mcts; }
  bool deterministic() const noexcept override { return false; }

  Action act(const GridState& state, std::size_t agent, Rng& rng) const override {
    if (agent != agent_) throw ArgumentError("MctsPolicy invoked for a different agent");
    return plan_action(state, agent_, spec_, teammates_, rollout_, params_, rng);
  }

  const std::vector<PolicyHandle>& teammates() const noexcept { return teammates_; }
  const PolicyHandle& rollout() const noexcept { return rollout_; }
  const MctsParams& params() const noexcept { return params_; }

 private:
  DomainSpec spec_;
  std::size_t agent_;
  std::vector<PolicyHandle> teammates_;
  PolicyHandle rollout_;
  MctsParams params_;
};

}  // namespace abc
