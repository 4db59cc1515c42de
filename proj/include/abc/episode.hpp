#pragma once

// Episodic simulation of a joint policy on a Factory Floor domain.

#include <cmath>
#include <cstdint>
#include <vector>

#include "abc/errors.hpp"
#include "abc/factory_floor.hpp"
#include "abc/parallel.hpp"
#include "abc/policy.hpp"
#include "abc/rng.hpp"
#include "abc/stats.hpp"

namespace abc {

using JointAction = std::vector<Action>;

struct TrajectoryStep {
  GridState state;  // pre-action state
  JointAction joint;
  double reward = 0.0;
};

struct Trajectory {
  GridState initial_state;
  std::vector<TrajectoryStep> steps;
  double total_return = 0.0;
  std::uint64_t seed = 0;
};

/// Seed of the i-th episode of an evaluation started from `master_seed`.
constexpr std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t episode) noexcept {
  return derive_seed(master_seed, {0x45504953ULL, episode});
}

/// Random stream of agent `agent`'s decision at time `t` within an episode.
constexpr std::uint64_t decision_seed(std::uint64_t ep_seed, int t, std::size_t agent) noexcept {
  return derive_seed(ep_seed, {1, static_cast<std::uint64_t>(t), agent});
}

/// Plays one episode to the horizon. Environment randomness and each agent's
/// per-step decision randomness come from independent streams derived from
/// `seed`, so the result is a pure function of its arguments.
inline Trajectory run_episode(const DomainSpec& spec, const std::vector<PolicyHandle>& policies,
                              std::uint64_t seed) {
  if (policies.size() != spec.n_agents())
    throw ConfigError("run_episode: " + std::to_string(policies.size()) + " policies for " +
                      std::to_string(spec.n_agents()) + " agents");
  for (const auto& p : policies)
    if (!p) throw ConfigError("run_episode: null policy");

  Trajectory traj;
  traj.seed = seed;
  traj.initial_state = initial_state(spec);
  traj.steps.reserve(static_cast<std::size_t>(spec.horizon));
  Rng env_rng(derive_seed(seed, {0}));
  GridState state = traj.initial_state;
  double discount = 1.0;
  while (state.time < spec.horizon) {
    JointAction joint(spec.n_agents());
    for (std::size_t i = 0; i < joint.size(); ++i) {
      Rng agent_rng(decision_seed(seed, state.time, i));
      joint[i] = policies[i]->act(state, i, agent_rng);
    }
    StepOutcome out = step(state, joint, spec, env_rng);
    traj.total_return += discount * out.reward;
    discount *= spec.discount;
    traj.steps.push_back({std::move(state), std::move(joint), out.reward});
    state = std::move(out.next);
  }
  return traj;
}

/// Runs n_episodes episodes (episode i seeded by episode_seed(seed, i)) in
/// parallel and returns their trajectories in episode order.
inline std::vector<Trajectory> run_episodes(const DomainSpec& spec,
                                            const std::vector<PolicyHandle>& policies,
                                            std::size_t n_episodes, std::uint64_t seed,
                                            std::size_t threads = 0) {
  if (n_episodes == 0) throw ArgumentError("n_episodes must be >= 1");
  std::vector<Trajectory> out(n_episodes);
  parallel_for(n_episodes, threads,
               [&](std::size_t i) { out[i] = run_episode(spec, policies, episode_seed(seed, i)); });
  return out;
}

inline ReturnSummary summarize(const std::vector<Trajectory>& trajectories) {
  std::vector<double> returns;
  returns.reserve(trajectories.size());
  for (const auto& t : trajectories) returns.push_back(t.total_return);
  return summarize_returns(returns);
}

inline ReturnSummary evaluate_policy(const DomainSpec& spec, const std::vector<PolicyHandle>& policies,
                                     std::size_t n_episodes, std::uint64_t seed,
                                     std::size_t threads = 0) {
  return summarize(run_episodes(spec, policies, n_episodes, seed, threads));
}

}  // namespace abc
