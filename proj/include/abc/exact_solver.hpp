#pragma once

// Finite-horizon dynamic programming on explicitly enumerated multi-agent
// MDPs: exact Q values of an agent's projected MDP, exact best responses,
// joint-response sweeps and Nash checks. Policies are time indexed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "abc/errors.hpp"
#include "abc/rng.hpp"

namespace abc::exact {

inline constexpr std::size_t kDefaultTableCap = 1'000'000;
inline constexpr double kValueTolerance = 1e-9;

struct Transition {
  std::uint32_t next = 0;
  double prob = 0.0;
};

/// Explicit MMDP. Joint actions are encoded in mixed radix with agent 0 as
/// the least significant digit.
struct EnumerableMmdp {
  std::size_t n_states = 0;
  std::vector<std::size_t> action_counts;  // |A_i| per agent
  int horizon = 1;
  double discount = 1.0;
  std::vector<double> reward;                         // [s * J + j]
  std::vector<std::vector<Transition>> transitions;   // [s * J + j]

  std::size_t n_agents() const noexcept { return action_counts.size(); }
  std::size_t joint_count() const noexcept {
    std::size_t j = 1;
    for (auto c : action_counts) j *= c;
    return j;
  }
  std::size_t table_entries() const noexcept { return n_states * joint_count(); }

  std::size_t joint_index(std::span<const std::size_t> actions) const {
    std::size_t idx = 0, radix = 1;
    for (std::size_t i = 0; i < action_counts.size(); ++i) {
      idx += actions[i] * radix;
      radix *= action_counts[i];
    }
    return idx;
  }
  std::size_t entry(std::size_t s, std::size_t joint) const noexcept { return s * joint_count() + joint; }
};

inline void check_capacity(const EnumerableMmdp& m, std::size_t cap = kDefaultTableCap) {
  if (m.table_entries() > cap)
    throw CapacityError("MMDP has " + std::to_string(m.table_entries()) + " (state, joint action) entries; cap is " +
                        std::to_string(cap));
}

/// Structural checks: table sizes, probability rows summing to 1.
inline void validate(const EnumerableMmdp& m, std::size_t cap = kDefaultTableCap) {
  check_capacity(m, cap);
  if (m.n_states == 0 || m.action_counts.empty()) throw ArgumentError("MMDP needs states and agents");
  if (m.horizon < 1) throw ArgumentError("MMDP horizon must be >= 1");
  for (auto c : m.action_counts)
    if (c == 0) throw ArgumentError("every agent needs at least one action");
  if (m.reward.size() != m.table_entries() || m.transitions.size() != m.table_entries())
    throw ArgumentError("MMDP tables have the wrong size");
  for (const auto& row : m.transitions) {
    double sum = 0.0;
    for (const auto& t : row) {
      if (t.next >= m.n_states) throw ArgumentError("transition to unknown state");
      sum += t.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("transition row does not sum to 1");
  }
}

/// Deterministic time-indexed joint policy: actions[i][t * S + s].
struct TabularJointPolicy {
  std::size_t n_states = 0;
  int horizon = 0;
  std::vector<std::vector<std::size_t>> actions;

  std::size_t action(std::size_t agent, std::size_t s, int t) const {
    return actions[agent][static_cast<std::size_t>(t) * n_states + s];
  }
  std::size_t& action(std::size_t agent, std::size_t s, int t) {
    return actions[agent][static_cast<std::size_t>(t) * n_states + s];
  }
  friend bool operator==(const TabularJointPolicy&, const TabularJointPolicy&) = default;
};

inline TabularJointPolicy constant_policy(const EnumerableMmdp& m, std::size_t action = 0) {
  TabularJointPolicy p{m.n_states, m.horizon, {}};
  for (std::size_t i = 0; i < m.n_agents(); ++i)
    p.actions.emplace_back(m.n_states * static_cast<std::size_t>(m.horizon), std::min(action, m.action_counts[i] - 1));
  return p;
}

/// Value table V[t * S + s] for t = 0..H (V at t = H is zero).
struct ValueTable {
  std::size_t n_states = 0;
  int horizon = 0;
  std::vector<double> v;

  double at(std::size_t s, int t) const { return v[static_cast<std::size_t>(t) * n_states + s]; }
};

/// Q[(t * S + s) * A_i + a] for the agent's projected MDP.
struct QTable {
  std::size_t n_states = 0;
  int horizon = 0;
  std::size_t n_actions = 0;
  std::vector<double> q;

  double at(std::size_t s, int t, std::size_t a) const {
    return q[(static_cast<std::size_t>(t) * n_states + s) * n_actions + a];
  }
};

namespace detail {

inline void check_policy(const EnumerableMmdp& m, const TabularJointPolicy& p) {
  if (p.n_states != m.n_states || p.horizon != m.horizon || p.actions.size() != m.n_agents())
    throw ArgumentError("policy does not match MMDP");
  for (std::size_t i = 0; i < m.n_agents(); ++i) {
    if (p.actions[i].size() != m.n_states * static_cast<std::size_t>(m.horizon))
      throw ArgumentError("policy table has the wrong size");
    for (auto a : p.actions[i])
      if (a >= m.action_counts[i]) throw ArgumentError("policy action out of range");
  }
}

inline double expected_next(const EnumerableMmdp& m, std::size_t e, const double* v_next) {
  double s = 0.0;
  for (const auto& tr : m.transitions[e]) s += tr.prob * v_next[tr.next];
  return s;
}

}  // namespace detail

/// Exact value of a joint policy at every (state, time).
inline ValueTable policy_values(const EnumerableMmdp& m, const TabularJointPolicy& p) {
  check_capacity(m);
  detail::check_policy(m, p);
  const std::size_t S = m.n_states;
  ValueTable V{S, m.horizon, std::vector<double>(S * static_cast<std::size_t>(m.horizon + 1), 0.0)};
  std::vector<std::size_t> joint(m.n_agents());
  for (int t = m.horizon - 1; t >= 0; --t) {
    const double* v_next = V.v.data() + static_cast<std::size_t>(t + 1) * S;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = p.action(i, s, t);
      const std::size_t e = m.entry(s, m.joint_index(joint));
      V.v[static_cast<std::size_t>(t) * S + s] = m.reward[e] + m.discount * detail::expected_next(m, e, v_next);
    }
  }
  return V;
}

/// Backward induction on agent i's projection, with every other agent held
/// to its component of `others` (agent i's own component is ignored).
inline QTable exact_q_values(const EnumerableMmdp& m, const TabularJointPolicy& others, std::size_t agent) {
  check_capacity(m);
  detail::check_policy(m, others);
  if (agent >= m.n_agents()) throw ArgumentError("agent index out of range");
  const std::size_t S = m.n_states, A = m.action_counts[agent];
  QTable Q{S, m.horizon, A, std::vector<double>(S * static_cast<std::size_t>(m.horizon) * A, 0.0)};
  std::vector<double> v_next(S, 0.0), v_cur(S, 0.0);
  std::vector<std::size_t> joint(m.n_agents());
  for (int t = m.horizon - 1; t >= 0; --t) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = others.action(i, s, t);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        joint[agent] = a;
        const std::size_t e = m.entry(s, m.joint_index(joint));
        const double q = m.reward[e] + m.discount * detail::expected_next(m, e, v_next.data());
        Q.q[(static_cast<std::size_t>(t) * S + s) * A + a] = q;
        best = std::max(best, q);
      }
      v_cur[s] = best;
    }
    std::swap(v_next, v_cur);
  }
  return Q;
}

/// Greedy action of a Q row; lowest index on ties.
inline std::size_t argmax_action(const QTable& Q, std::size_t s, int t) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < Q.n_actions; ++a)
    if (Q.at(s, t, a) > Q.at(s, t, best)) best = a;
  return best;
}

/// Replaces agent i's component with the optimal policy of its projection.
inline TabularJointPolicy exact_best_response(const EnumerableMmdp& m, const TabularJointPolicy& joint,
                                              std::size_t agent) {
  const QTable Q = exact_q_values(m, joint, agent);
  TabularJointPolicy out = joint;
  for (int t = 0; t < m.horizon; ++t)
    for (std::size_t s = 0; s < m.n_states; ++s) out.action(agent, s, t) = argmax_action(Q, s, t);
  return out;
}

inline bool values_equal(const ValueTable& a, const ValueTable& b, double tol = kValueTolerance) {
  if (a.v.size() != b.v.size()) return false;
  for (std::size_t k = 0; k < a.v.size(); ++k)
    if (std::abs(a.v[k] - b.v[k]) > tol * std::max(1.0, std::abs(a.v[k]))) return false;
  return true;
}

struct SweepResult {
  TabularJointPolicy policy;
  std::size_t sweeps = 0;
  /// Time-0 values of every state after each best-response application,
  /// preceded by those of the starting policy.
  std::vector<std::vector<double>> value_trace;
};

inline std::vector<double> initial_values(const ValueTable& V) {
  return {V.v.begin(), V.v.begin() + static_cast<std::ptrdiff_t>(V.n_states)};
}

/// Applies BR_{perm[0]}, ..., BR_{perm[n-1]} until a full sweep leaves every
/// state value unchanged.
inline SweepResult joint_response_sweep(const EnumerableMmdp& m, TabularJointPolicy joint,
                                        std::span<const std::size_t> permutation,
                                        std::size_t max_sweeps = 10'000) {
  {
    std::vector<std::size_t> sorted(permutation.begin(), permutation.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k)
      if (sorted.size() != m.n_agents() || sorted[k] != k) throw ArgumentError("not a permutation of the agents");
  }
  SweepResult res;
  ValueTable V = policy_values(m, joint);
  res.value_trace.push_back(initial_values(V));
  for (;;) {
    if (res.sweeps == max_sweeps)
      throw std::runtime_error("joint_response_sweep did not converge within " + std::to_string(max_sweeps) +
                               " sweeps");
    ++res.sweeps;
    const ValueTable before = V;
    for (std::size_t agent : permutation) {
      joint = exact_best_response(m, joint, agent);
      V = policy_values(m, joint);
      res.value_trace.push_back(initial_values(V));
    }
    if (values_equal(before, V)) break;
  }
  res.policy = std::move(joint);
  return res;
}

struct NashWitness {
  std::size_t agent = 0;
  std::size_t state = 0;
  int time = 0;
  std::size_t action = 0;  // strictly better deviation
  double gain = 0.0;
};

struct NashCheck {
  bool is_nash = true;
  std::optional<NashWitness> witness;
};

/// True iff no agent's best response changes any state value; otherwise the
/// largest single-step improving deviation found is returned as witness.
inline NashCheck is_nash(const EnumerableMmdp& m, const TabularJointPolicy& joint, double tol = kValueTolerance) {
  const ValueTable V = policy_values(m, joint);
  NashCheck out;
  for (std::size_t i = 0; i < m.n_agents(); ++i) {
    const QTable Q = exact_q_values(m, joint, i);
    for (int t = 0; t < m.horizon; ++t)
      for (std::size_t s = 0; s < m.n_states; ++s) {
        const std::size_t a = argmax_action(Q, s, t);
        const double gain = Q.at(s, t, a) - V.at(s, t);
        if (gain > tol * std::max(1.0, std::abs(V.at(s, t))) && (!out.witness || gain > out.witness->gain)) {
          out.is_nash = false;
          out.witness = NashWitness{i, s, t, a, gain};
        }
      }
    if (!out.is_nash) return out;
  }
  return out;
}

/// Centralized optimum by DP over joint actions (lowest joint index on ties).
inline TabularJointPolicy optimal_joint_policy(const EnumerableMmdp& m) {
  check_capacity(m);
  const std::size_t S = m.n_states, J = m.joint_count();
  TabularJointPolicy p = constant_policy(m);
  std::vector<double> v_next(S, 0.0), v_cur(S, 0.0);
  for (int t = m.horizon - 1; t >= 0; --t) {
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t best_j = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < J; ++j) {
        const std::size_t e = m.entry(s, j);
        const double q = m.reward[e] + m.discount * detail::expected_next(m, e, v_next.data());
        if (q > best) {
          best = q;
          best_j = j;
        }
      }
      v_cur[s] = best;
      for (std::size_t i = 0; i < m.n_agents(); ++i) {
        p.action(i, s, t) = best_j % m.action_counts[i];
        best_j /= m.action_counts[i];
      }
    }
    std::swap(v_next, v_cur);
  }
  return p;
}

/// Seeded random MMDP: transition rows uniform on the simplex, rewards
/// uniform in [0, 1).
inline EnumerableMmdp random_mmdp(Rng& rng, std::size_t n_states, std::vector<std::size_t> action_counts,
                                  int horizon, double discount = 1.0) {
  EnumerableMmdp m;
  m.n_states = n_states;
  m.action_counts = std::move(action_counts);
  m.horizon = horizon;
  m.discount = discount;
  const std::size_t E = m.table_entries();
  m.reward.resize(E);
  m.transitions.resize(E);
  for (std::size_t e = 0; e < E; ++e) {
    m.reward[e] = rng.uniform();
    // Normalized unit exponentials are uniform on the simplex.
    std::vector<double> w(n_states);
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log1p(-rng.uniform()));
    for (std::size_t s = 0; s < n_states; ++s)
      m.transitions[e].push_back({static_cast<std::uint32_t>(s), w[s] / sum});
    // Renormalize so the row sums to one within rounding.
    double total = 0.0;
    for (const auto& tr : m.transitions[e]) total += tr.prob;
    m.transitions[e].back().prob += 1.0 - total;
  }
  return m;
}

inline TabularJointPolicy random_joint_policy(const EnumerableMmdp& m, Rng& rng) {
  TabularJointPolicy p = constant_policy(m);
  for (std::size_t i = 0; i < m.n_agents(); ++i)
    for (auto& a : p.actions[i]) a = rng.below(m.action_counts[i]);
  return p;
}

}  // namespace abc::exact
