#pragma once

// Sparse UCT over a single-agent simulator. The tree alternates state nodes
// and action nodes; an action node keeps sampling fresh successor states from
// the simulator until it has `sparse_limit` distinct children, after which
// successors are redrawn from the recorded outcome frequencies.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "abc/errors.hpp"
#include "abc/rng.hpp"

namespace abc {

struct MctsParams {
  double exploration = 0.5;        // C; the per-state constant is C * (H - t)
  std::size_t iterations = 20000;  // l
  std::size_t sparse_limit = 20;
  double diy_bonus = 0.7;

  friend bool operator==(const MctsParams&, const MctsParams&) = default;
};

inline void validate(const MctsParams& p) {
  if (!(p.exploration > 0.0)) throw ArgumentError("exploration constant must be positive");
  if (p.iterations < 1) throw ArgumentError("iterations must be >= 1");
  if (p.sparse_limit < 1) throw ArgumentError("sparse limit must be >= 1");
}

/// UCT selection score; unvisited children score +inf.
inline double uct_score(double q_estimate, std::uint64_t parent_visits, std::uint64_t node_visits,
                        double c) noexcept {
  if (node_visits == 0) return std::numeric_limits<double>::infinity();
  return q_estimate + c * std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                    static_cast<double>(node_visits));
}

/// Exploration constant at a state with `remaining` steps to the horizon.
constexpr double scaled_exploration(double C, int horizon, int t) noexcept {
  return C * static_cast<double>(horizon - t);
}

/// Requirements on the model searched by SparseUct.
template <class S>
concept SearchSimulator = requires(S& sim, const typename S::State& s, std::size_t a, Rng& rng) {
  typename S::State;
  { sim.num_actions() } -> std::convertible_to<std::size_t>;
  { sim.terminal(s) } -> std::convertible_to<bool>;
  { sim.remaining(s) } -> std::convertible_to<double>;
  { sim.discount() } -> std::convertible_to<double>;
  { sim.transition(s, a, rng) } -> std::same_as<std::pair<typename S::State, double>>;
  { sim.rollout(s, rng) } -> std::convertible_to<double>;
} && std::equality_comparable<typename S::State>;

/// Outcome edge of an action node. `count` is the number of times the
/// simulator produced this (state, reward) pair.
struct OutcomeEdge {
  std::uint32_t node = 0;
  std::uint32_t count = 0;
  double reward = 0.0;
};

struct ActionNode {
  std::uint64_t visits = 0;
  double value_sum = 0.0;
  std::vector<OutcomeEdge> children;
  std::uint64_t simulator_calls = 0;

  double q_estimate() const noexcept {
    return visits == 0 ? 0.0 : value_sum / static_cast<double>(visits);
  }
};

/// Picks the outcome edge to follow from `node`. While the node has fewer than
/// `limit` distinct children, `sample_fresh()` is called; it must invoke the
/// simulator, record the outcome (new edge or count+1) and return the edge
/// index. At the cap an existing edge is drawn with probability proportional
/// to its (frozen) count.
template <class SampleFresh>
std::size_t sparse_next_state(ActionNode& node, std::size_t limit, Rng& rng, SampleFresh&& sample_fresh) {
  if (node.children.size() < limit) {
    ++node.simulator_calls;
    return sample_fresh();
  }
  std::uint64_t total = 0;
  for (const auto& e : node.children) total += e.count;
  std::uint64_t u = rng.below(total);
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    if (u < node.children[k].count) return k;
    u -= node.children[k].count;
  }
  return node.children.size() - 1;
}

template <class State>
struct StateNode {
  State state;
  std::uint64_t visits = 0;
  double value_sum = 0.0;
  std::uint32_t first_action = std::numeric_limits<std::uint32_t>::max();  // unexpanded

  bool expanded() const noexcept { return first_action != std::numeric_limits<std::uint32_t>::max(); }
};

template <SearchSimulator Sim>
class SparseUct {
 public:
  using State = typename Sim::State;

  SparseUct(Sim& sim, MctsParams params) : sim_(sim), params_(params) { validate(params_); }

  /// Runs params.iterations iterations from a fresh tree rooted at `root` and
  /// returns the root action with the highest Q estimate (lowest index on ties).
  std::size_t search(const State& root, Rng& rng) {
    states_.clear();
    actions_.clear();
    states_.push_back({root});
    for (std::size_t it = 0; it < params_.iterations; ++it) iterate(0, rng);
    return best_root_action();
  }

  std::size_t best_root_action() const {
    const auto& root = states_.at(0);
    if (!root.expanded()) return 0;
    std::size_t best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sim_.num_actions(); ++a) {
      const auto& an = actions_[root.first_action + a];
      const double q = an.visits == 0 ? -std::numeric_limits<double>::infinity() : an.q_estimate();
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    return best;
  }

  /// Root action node for action a (valid after search()).
  const ActionNode& root_action(std::size_t a) const { return actions_.at(states_.at(0).first_action + a); }
  const StateNode<State>& root() const { return states_.at(0); }

  const std::vector<StateNode<State>>& state_nodes() const noexcept { return states_; }
  const std::vector<ActionNode>& action_nodes() const noexcept { return actions_; }
  const ActionNode& action_child(const StateNode<State>& s, std::size_t a) const {
    return actions_.at(s.first_action + a);
  }

 private:
  double iterate(std::uint32_t s_idx, Rng& rng) {
    if (sim_.terminal(states_[s_idx].state)) {
      ++states_[s_idx].visits;
      return 0.0;
    }
    if (states_[s_idx].visits == 0) {
      const double r = sim_.rollout(states_[s_idx].state, rng);
      states_[s_idx].visits = 1;
      states_[s_idx].value_sum += r;
      return r;
    }
    if (!states_[s_idx].expanded()) {
      states_[s_idx].first_action = static_cast<std::uint32_t>(actions_.size());
      actions_.resize(actions_.size() + sim_.num_actions());
    }
    const std::size_t a = select(s_idx);
    const std::uint32_t a_idx = states_[s_idx].first_action + static_cast<std::uint32_t>(a);

    const std::size_t edge = sparse_next_state(actions_[a_idx], params_.sparse_limit, rng, [&] {
      auto [next, reward] = sim_.transition(states_[s_idx].state, a, rng);
      auto& children = actions_[a_idx].children;
      for (std::size_t k = 0; k < children.size(); ++k) {
        if (children[k].reward == reward && states_[children[k].node].state == next) {
          ++children[k].count;
          return k;
        }
      }
      const auto node = static_cast<std::uint32_t>(states_.size());
      states_.push_back({std::move(next)});
      actions_[a_idx].children.push_back({node, 1, reward});
      return actions_[a_idx].children.size() - 1;
    });
    const OutcomeEdge e = actions_[a_idx].children[edge];

    const double ret = e.reward + sim_.discount() * iterate(e.node, rng);
    auto& an = actions_[a_idx];
    ++an.visits;
    an.value_sum += ret;
    ++states_[s_idx].visits;
    states_[s_idx].value_sum += ret;
    return ret;
  }

  std::size_t select(std::uint32_t s_idx) const {
    const auto& s = states_[s_idx];
    const double c = params_.exploration * sim_.remaining(s.state);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sim_.num_actions(); ++a) {
      const auto& an = actions_[s.first_action + a];
      const double score = uct_score(an.q_estimate(), s.visits, an.visits, c);
      if (score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  }

  Sim& sim_;
  MctsParams params_;
  std::vector<StateNode<State>> states_;
  std::vector<ActionNode> actions_;
};

}  // namespace abc
