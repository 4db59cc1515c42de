#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "abc/episode.hpp"
#include "abc/exact_solver.hpp"
#include "abc/floor_compiler.hpp"
#include "abc/heuristic.hpp"
#include "abc/verification.hpp"
#include "support.hpp"

namespace abc::exact {
namespace {

/// Single state, self loop, per-agent actions; reward(joint) given by `r`.
EnumerableMmdp matrix_game(std::vector<std::size_t> counts, std::vector<double> r, int horizon, double gamma = 1.0) {
  EnumerableMmdp m;
  m.n_states = 1;
  m.action_counts = std::move(counts);
  m.horizon = horizon;
  m.discount = gamma;
  m.reward = std::move(r);
  m.transitions.assign(m.reward.size(), {{0, 1.0}});
  validate(m);
  return m;
}

TEST(PolicyValues, SingleStateRepeatsReward) {
  const auto m = matrix_game({2}, {1.0, 0.0}, 3);
  const auto V = policy_values(m, constant_policy(m, 0));
  EXPECT_DOUBLE_EQ(V.at(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(V.at(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(V.at(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(policy_values(m, constant_policy(m, 1)).at(0, 0), 0.0);
}

TEST(PolicyValues, DiscountIsApplied) {
  const auto m = matrix_game({1}, {1.0}, 3, 0.5);
  EXPECT_DOUBLE_EQ(policy_values(m, constant_policy(m)).at(0, 0), 1.75);
}

TEST(QValues, ZeroDiscountGivesImmediateReward) {
  Rng rng(1);
  auto m = random_mmdp(rng, 4, {3, 2}, 3, 0.0);
  const auto others = random_joint_policy(m, rng);
  const auto Q = exact_q_values(m, others, 0);
  for (int t = 0; t < 3; ++t)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t a = 0; a < 3; ++a) {
        const std::vector<std::size_t> joint{a, others.action(1, s, t)};
        EXPECT_DOUBLE_EQ(Q.at(s, t, a), m.reward[m.entry(s, m.joint_index(joint))]);
      }
}

TEST(QValues, CorridorByHand) {
  const auto f = compile_floor(verify::corridor_spec());
  const auto Q = exact_q_values(f.mmdp, constant_policy(f.mmdp), 0);
  EXPECT_NEAR(Q.at(f.initial, 0, index_of(Action::Right)), 0.81, 1e-12);
  for (Action a : {Action::Up, Action::Down, Action::Left, Action::Act})
    EXPECT_NEAR(Q.at(f.initial, 0, index_of(a)), 0.0, 1e-12) << index_of(a);
  // One cell from the task with two steps left: Right then Act.
  GridState s = f.states[f.initial];
  s.robots[0] = {0, 1};
  EXPECT_NEAR(Q.at(f.state_index(s), 1, index_of(Action::Right)), 0.9, 1e-12);
  s.robots[0] = {0, 2};
  EXPECT_NEAR(Q.at(f.state_index(s), 2, index_of(Action::Act)), 1.0, 1e-12);
}

TEST(BestResponse, MatchesBruteForceOverAllPolicies) {
  // Two states, two actions, H = 2: each agent has 2^4 Markov policies.
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_mmdp(rng, 2, {2, 2}, 2, trial % 2 ? 1.0 : 0.8);
    const auto joint = random_joint_policy(m, rng);
    for (std::size_t agent = 0; agent < 2; ++agent) {
      const auto V_br = policy_values(m, exact_best_response(m, joint, agent));
      for (unsigned code = 0; code < 16; ++code) {
        auto alt = joint;
        for (std::size_t k = 0; k < 4; ++k) alt.actions[agent][k] = (code >> k) & 1U;
        const auto V = policy_values(m, alt);
        for (std::size_t s = 0; s < 2; ++s) EXPECT_GE(V_br.at(s, 0) + 1e-12, V.at(s, 0));
      }
    }
  }
}

TEST(BestResponse, IsAFixedPointOfItself) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_mmdp(rng, 5, {3, 2, 2}, 3);
    const auto once = exact_best_response(m, random_joint_policy(m, rng), 1);
    EXPECT_EQ(exact_best_response(m, once, 1), once);
  }
}

TEST(BestResponse, SingleAgentIsTheOptimum) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_mmdp(rng, 6, {4}, 4);
    const std::vector<std::size_t> perm{0};
    const auto sweep = joint_response_sweep(m, random_joint_policy(m, rng), perm);
    EXPECT_LE(sweep.sweeps, 2u);
    EXPECT_TRUE(values_equal(policy_values(m, sweep.policy), policy_values(m, optimal_joint_policy(m))));
  }
}

TEST(Optimum, DominatesRandomPoliciesAndIsNash) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_mmdp(rng, 4, {2, 3}, 3);
    const auto opt = optimal_joint_policy(m);
    const auto V_opt = policy_values(m, opt);
    EXPECT_TRUE(is_nash(m, opt).is_nash);
    for (int k = 0; k < 10; ++k) {
      const auto V = policy_values(m, random_joint_policy(m, rng));
      for (std::size_t s = 0; s < 4; ++s) EXPECT_GE(V_opt.at(s, 0) + 1e-12, V.at(s, 0));
    }
  }
}

// Coordination game: both pick 1 -> 1.0, both pick 0 -> 0.5, mismatch -> 0.
// Joint index = a0 + 2 * a1.
const std::vector<double> kCoordination{0.5, 0.0, 0.0, 1.0};

TEST(Nash, SuboptimalEquilibriumIsRecognized) {
  const auto m = matrix_game({2, 2}, kCoordination, 1);
  const auto low = constant_policy(m, 0);
  EXPECT_TRUE(is_nash(m, low).is_nash);
  const std::vector<std::size_t> perm{0, 1};
  const auto sweep = joint_response_sweep(m, low, perm);
  EXPECT_EQ(sweep.policy, low);
  EXPECT_EQ(sweep.sweeps, 1u);
  EXPECT_DOUBLE_EQ(policy_values(m, optimal_joint_policy(m)).at(0, 0), 1.0);
}

TEST(Nash, WitnessForMismatchedPolicy) {
  const auto m = matrix_game({2, 2}, kCoordination, 1);
  auto p = constant_policy(m, 0);
  p.action(1, 0, 0) = 1;
  const auto check = is_nash(m, p);
  ASSERT_FALSE(check.is_nash);
  ASSERT_TRUE(check.witness.has_value());
  EXPECT_EQ(check.witness->agent, 0u);
  EXPECT_EQ(check.witness->action, 1u);
  EXPECT_DOUBLE_EQ(check.witness->gain, 1.0);
}

TEST(Sweep, IdempotentAtEquilibrium) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_mmdp(rng, 4, {2, 2, 3}, 3);
    const std::vector<std::size_t> perm{2, 0, 1};
    const auto first = joint_response_sweep(m, random_joint_policy(m, rng), perm);
    ASSERT_TRUE(is_nash(m, first.policy).is_nash);
    const auto again = joint_response_sweep(m, first.policy, perm);
    EXPECT_EQ(again.sweeps, 1u);
    EXPECT_TRUE(values_equal(policy_values(m, again.policy), policy_values(m, first.policy)));
  }
}

TEST(Sweep, RejectsNonPermutation) {
  Rng rng(7);
  const auto m = random_mmdp(rng, 2, {2, 2}, 2);
  const std::vector<std::size_t> bad{0, 0};
  EXPECT_THROW(joint_response_sweep(m, constant_policy(m), bad), ArgumentError);
}

TEST(Validation, CatchesMalformedModels) {
  Rng rng(8);
  auto m = random_mmdp(rng, 2, {2}, 2);
  m.transitions[0][0].prob += 0.1;
  EXPECT_THROW(validate(m), ArgumentError);
  auto big = random_mmdp(rng, 2, {2}, 2);
  EXPECT_THROW(check_capacity(big, 3), CapacityError);
  auto p = constant_policy(big);
  p.actions[0][0] = 5;
  EXPECT_THROW(policy_values(big, p), ArgumentError);
}

TEST(CompiledFloor, CapacityLimits) {
  EXPECT_THROW(compile_floor(testing::make_spec(5, 2, 3, {{0, 0}})), CapacityError);
  EXPECT_THROW(compile_floor(testing::make_spec(3, 3, 3, {{0, 0}, {0, 1}, {0, 2}})), CapacityError);
  EXPECT_THROW(compile_floor(testing::make_spec(3, 3, 3, {{0, 0}}, {{{1, 1}, 2}})), CapacityError);
  auto spawning = testing::make_spec(3, 3, 3, {{0, 0}});
  spawning.spawn_cells = {{1, 1}};
  spawning.spawn_events_per_step = 1;
  spawning.spawn_probability = 0.5;
  EXPECT_THROW(compile_floor(spawning), CapacityError);
}

TEST(CompiledFloor, HeuristicValueMatchesSimulation) {
  const auto spec = testing::make_spec(3, 3, 5, {{0, 0}, {2, 2}}, {{{0, 2}, 1}, {{1, 1}, 1}, {{2, 0}, 1}}, 0.9);
  const auto f = compile_floor(spec);
  const double exact = policy_values(f.mmdp, heuristic_table(f, spec)).at(f.initial, 0);
  const auto sim = evaluate_policy(spec, std::vector<PolicyHandle>(2, make_heuristic_policy(spec)), 20000, 3);
  EXPECT_NEAR(sim.mean, exact, 4 * sim.sample_sd / std::sqrt(20000.0) + 1e-9);
}

TEST(CompiledFloor, TabularPolicyRoundTripsThroughSimulator) {
  const auto spec = testing::make_spec(3, 3, 4, {{0, 0}, {2, 2}}, {{{0, 2}, 1}, {{2, 0}, 1}}, 0.9);
  const auto f = compile_floor(spec);
  const auto opt = optimal_joint_policy(f.mmdp);
  const std::vector<PolicyHandle> pol{to_policy(f, opt, 0), to_policy(f, opt, 1)};
  const double exact = policy_values(f.mmdp, opt).at(f.initial, 0);
  const auto sim = evaluate_policy(spec, pol, 20000, 4);
  EXPECT_NEAR(sim.mean, exact, 4 * sim.sample_sd / std::sqrt(20000.0) + 1e-9);
  EXPECT_EQ(tabulate(f, pol), opt);
}

TEST(CompiledFloor, BestResponsesImproveOnTheHeuristic) {
  // Both robots start together; the heuristic sends them to different piles
  // but the cheap follow-up pile is left to chance.
  const auto spec = testing::make_spec(3, 3, 6, {{1, 1}, {1, 1}}, {{{0, 0}, 1}, {{0, 1}, 1}, {{2, 2}, 1}}, 0.9);
  const auto f = compile_floor(spec);
  const auto heur = heuristic_table(f, spec);
  const auto V0 = policy_values(f.mmdp, heur);
  const std::vector<std::size_t> perm{0, 1};
  const auto sweep = joint_response_sweep(f.mmdp, heur, perm);
  const auto V = policy_values(f.mmdp, sweep.policy);
  for (std::size_t s = 0; s < f.mmdp.n_states; ++s) EXPECT_GE(V.at(s, 0) + 1e-9, V0.at(s, 0));
  EXPECT_GT(V.at(f.initial, 0), V0.at(f.initial, 0));
  EXPECT_TRUE(is_nash(f.mmdp, sweep.policy).is_nash);
  EXPECT_LE(V.at(f.initial, 0), policy_values(f.mmdp, optimal_joint_policy(f.mmdp)).at(f.initial, 0) + 1e-9);
}

TEST(Suites, SmallRunsPass) {
  EXPECT_TRUE(verify::lemma1_suite(11, 10).passed);
  EXPECT_TRUE(verify::corollary1_suite(11, 10).passed);
}

}  // namespace
}  // namespace abc::exact
