#pragma once

// Generation-0 teammate model: each robot picks the k-th best task pile by
// count/distance, k being its social rank among co-located robots, and walks
// there along a shortest Manhattan path.

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "abc/factory_floor.hpp"
#include "abc/policy.hpp"

namespace abc {

/// 1 + number of robots on the same cell with a smaller identifier.
inline int social_rank(const GridState& state, std::size_t agent, const DomainSpec& spec) {
  int k = 1;
  const Cell here = state.robots[agent];
  for (std::size_t j = 0; j < state.robots.size(); ++j)
    if (j != agent && state.robots[j] == here && spec.robot_ids[j] < spec.robot_ids[agent]) ++k;
  return k;
}

/// -inf on empty cells, +inf on the robot's own non-empty cell, otherwise
/// tasks / manhattan distance.
inline double destination_value(const GridState& state, Cell cell, std::size_t agent,
                                 const DomainSpec& spec) {
  const int tasks = state.tasks[spec.cell_index(cell)];
  if (tasks == 0) return -std::numeric_limits<double>::infinity();
  const int dist = manhattan(cell, state.robots[agent]);
  if (dist == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(tasks) / static_cast<double>(dist);
}

/// First move of a shortest path from `from` to `to`; the axis with the larger
/// displacement goes first, vertical on ties.
inline Action step_towards(Cell from, Cell to) noexcept {
  const int dr = to.row - from.row;
  const int dc = to.col - from.col;
  if (dr == 0 && dc == 0) return Action::Act;
  if (std::abs(dr) >= std::abs(dc)) return dr < 0 ? Action::Up : Action::Down;
  return dc < 0 ? Action::Left : Action::Right;
}

/// Cell the heuristic robot heads for, or nullopt when no tasks remain.
inline std::optional<Cell> heuristic_target(const GridState& state, std::size_t agent,
                                            const DomainSpec& spec) {
  struct Scored {
    double value;
    std::size_t idx;
  };
  std::vector<Scored> ranked;
  for (std::size_t idx = 0; idx < spec.n_cells(); ++idx) {
    if (state.tasks[idx] == 0) continue;
    ranked.push_back({destination_value(state, spec.cell_at(idx), agent, spec), idx});
  }
  if (ranked.empty()) return std::nullopt;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Scored& a, const Scored& b) { return a.value > b.value; });
  const auto k = static_cast<std::size_t>(social_rank(state, agent, spec));
  return spec.cell_at(ranked[(k - 1) % ranked.size()].idx);
}

inline Action heuristic_action(const GridState& state, std::size_t agent, const DomainSpec& spec) {
  auto target = heuristic_target(state, agent, spec);
  if (!target) return Action::Act;
  return step_towards(state.robots[agent], *target);
}

class HeuristicPolicy final : public Policy {
 public:
  explicit HeuristicPolicy(DomainSpec spec) : spec_(std::move(spec)) {}

  PolicyKind kind() const noexcept override { return PolicyKind::Heuristic; }
  Action act(const GridState& state, std::size_t agent, Rng&) const override {
    return heuristic_action(state, agent, spec_);
  }

 private:
  DomainSpec spec_;
};

inline PolicyHandle make_heuristic_policy(const DomainSpec& spec) {
  return std::make_shared<HeuristicPolicy>(spec);
}

}  // namespace abc
