#pragma once

// Compiles a tiny Factory Floor instance into an explicit MMDP so the exact
// solver can check the real dynamics. States are (robot cells, remaining
// tasks); time is carried by the solver's time index.

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "abc/exact_solver.hpp"
#include "abc/factory_floor.hpp"
#include "abc/heuristic.hpp"
#include "abc/policy.hpp"

namespace abc {

inline constexpr std::size_t kMaxCompiledCells = 9;
inline constexpr std::size_t kMaxCompiledRobots = 2;

struct CompiledFloor {
  exact::EnumerableMmdp mmdp;
  std::vector<GridState> states;  // index -> state, time fixed at 0
  std::unordered_map<GridState, std::uint32_t, GridStateHash> index;
  std::uint32_t initial = 0;

  /// Index of `s` ignoring its time field.
  std::uint32_t state_index(GridState s) const {
    s.time = 0;
    auto it = index.find(s);
    if (it == index.end()) throw ArgumentError("state is not reachable in the compiled floor");
    return it->second;
  }
};

/// Breadth-first enumeration of the states reachable from the initial state.
/// Throws CapacityError outside the supported size.
inline CompiledFloor compile_floor(const DomainSpec& spec) {
  validate(spec);
  if (spec.n_cells() > kMaxCompiledCells || spec.n_agents() > kMaxCompiledRobots)
    throw CapacityError("floor too large to compile (at most 9 cells and 2 robots)");
  if (spec.spawn_events_per_step > 0) throw CapacityError("floors with task spawns cannot be compiled");
  for (const auto& t : spec.fixed_tasks)
    if (t.count > 1) throw CapacityError("compiled floors allow at most one task per cell");

  const std::size_t n = spec.n_agents();
  CompiledFloor out;
  auto& m = out.mmdp;
  m.action_counts.assign(n, kNumActions);
  m.horizon = spec.horizon;
  m.discount = spec.discount;
  const std::size_t J = m.joint_count();

  auto intern = [&](GridState s) {
    s.time = 0;
    auto [it, fresh] = out.index.try_emplace(s, static_cast<std::uint32_t>(out.states.size()));
    if (fresh) out.states.push_back(s);
    return it->second;
  };
  out.initial = intern(initial_state(spec));

  std::vector<Action> joint(n);
  std::vector<bool> ok(n);
  for (std::size_t s = 0; s < out.states.size(); ++s) {
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t i = 0, r = j; i < n; ++i, r /= kNumActions) joint[i] = action_from_index(r % kNumActions);
      std::map<std::uint32_t, double> next;
      double reward = 0.0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          ok[i] = (mask >> i) & 1U;
          const double succ = joint[i] == Action::Act ? spec.act_success : spec.move_success;
          p *= ok[i] ? succ : 1.0 - succ;
        }
        if (p == 0.0) continue;
        // Copy: intern() may grow out.states and invalidate references.
        const GridState from = out.states[s];
        const StepOutcome o = resolve_actions(from, joint, ok, spec);
        reward += p * o.reward;
        next[intern(o.next)] += p;
      }
      m.reward.push_back(reward);
      auto& row = m.transitions.emplace_back();
      for (const auto& [to, p] : next) row.push_back({to, p});
    }
    if (out.states.size() * J > exact::kDefaultTableCap) throw CapacityError("compiled floor exceeds the table cap");
  }
  m.n_states = out.states.size();
  exact::validate(m);
  return out;
}

/// Tabular version of a deterministic per-agent policy over every (state, t).
inline exact::TabularJointPolicy tabulate(const CompiledFloor& f, const std::vector<PolicyHandle>& policies) {
  const auto& m = f.mmdp;
  if (policies.size() != m.n_agents()) throw ArgumentError("tabulate: one policy per agent required");
  exact::TabularJointPolicy p = exact::constant_policy(m);
  Rng rng(0);
  for (std::size_t i = 0; i < m.n_agents(); ++i)
    for (int t = 0; t < m.horizon; ++t)
      for (std::size_t s = 0; s < m.n_states; ++s) {
        GridState g = f.states[s];
        g.time = t;
        p.action(i, s, t) = index_of(policies[i]->act(g, i, rng));
      }
  return p;
}

inline exact::TabularJointPolicy heuristic_table(const CompiledFloor& f, const DomainSpec& spec) {
  return tabulate(f, std::vector<PolicyHandle>(spec.n_agents(), make_heuristic_policy(spec)));
}

/// Agent `agent`'s component of a tabular policy as a simulator policy.
inline PolicyHandle to_policy(const CompiledFloor& f, const exact::TabularJointPolicy& p, std::size_t agent) {
  FixedTablePolicy::Table table;
  for (int t = 0; t < f.mmdp.horizon; ++t)
    for (std::size_t s = 0; s < f.mmdp.n_states; ++s) {
      GridState g = f.states[s];
      g.time = t;
      table.emplace(std::move(g), action_from_index(p.action(agent, s, t)));
    }
  return std::make_shared<FixedTablePolicy>(std::move(table));
}

}  // namespace abc
