#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "abc/episode.hpp"
#include "abc/heuristic.hpp"
#include "abc/rng.hpp"
#include "abc/stats.hpp"
#include "support.hpp"

namespace abc {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng r(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng r(9);
  std::vector<int> hist(5);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[r.below(5)];
  for (int h : hist) EXPECT_NEAR(h / double(n), 0.2, 0.01);
}

TEST(DeriveSeed, PathComposes) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(derive_seed(1, {2}), {3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
}

TEST(Summary, ConstantReturnsHaveZeroWidth) {
  const std::vector<double> xs{8, 8, 8};
  const auto s = summarize_returns(xs);
  EXPECT_DOUBLE_EQ(s.mean, 8.0);
  EXPECT_DOUBLE_EQ(s.half_width(), 0.0);
}

TEST(Summary, TwoSamples) {
  const std::vector<double> xs{5, 7};
  const auto s = summarize_returns(xs);
  EXPECT_DOUBLE_EQ(s.mean, 6.0);
  EXPECT_NEAR(s.sample_sd, std::sqrt(2.0), 1e-12);
  // 1.96 * sqrt(2) / sqrt(2) = 1.96
  EXPECT_NEAR(s.ci95_low, 4.04, 1e-12);
  EXPECT_NEAR(s.ci95_high, 7.96, 1e-12);
}

TEST(Summary, SingleSampleHasZeroWidth) {
  const std::vector<double> xs{6};
  const auto s = summarize_returns(xs);
  EXPECT_EQ(s.n_episodes, 1u);
  EXPECT_DOUBLE_EQ(s.mean, 6.0);
  EXPECT_DOUBLE_EQ(s.ci95_low, 6.0);
  EXPECT_DOUBLE_EQ(s.ci95_high, 6.0);
}

TEST(Summary, EmptyListThrows) {
  EXPECT_THROW(summarize_returns(std::vector<double>{}), ArgumentError);
}

TEST(Summary, IntervalBracketsMean) {
  Rng r(3);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> xs(2 + r.below(20));
    for (auto& x : xs) x = r.uniform(-5, 5);
    const auto s = summarize_returns(xs);
    EXPECT_LE(s.ci95_low, s.mean);
    EXPECT_GE(s.ci95_high, s.mean);
    EXPECT_NEAR(s.half_width(), 1.96 * s.sample_sd / std::sqrt(double(xs.size())), 1e-12);
  }
}

class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(Action a) : a_(a) {}
  PolicyKind kind() const noexcept override { return PolicyKind::FixedTable; }
  Action act(const GridState&, std::size_t, Rng&) const override { return a_; }

 private:
  Action a_;
};

TEST(Episode, DeterministicGivenSeed) {
  const auto spec = testing::make_spec(6, 4, 10, {{0, 0}, {3, 5}}, {{{1, 2}, 2}, {{2, 4}, 1}}, 0.9);
  const std::vector<PolicyHandle> pol(2, make_heuristic_policy(spec));
  const auto a = run_episode(spec, pol, 77);
  const auto b = run_episode(spec, pol, 77);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].state, b.steps[t].state);
    EXPECT_EQ(a.steps[t].joint, b.steps[t].joint);
    EXPECT_EQ(a.steps[t].reward, b.steps[t].reward);
  }
  EXPECT_EQ(a.total_return, b.total_return);
}

TEST(Episode, ExactlyHorizonStepsAndReturnIsRewardSum) {
  const auto spec = testing::make_spec(6, 4, 10, {{0, 0}, {3, 5}}, {{{1, 2}, 2}, {{2, 4}, 1}}, 0.9);
  const std::vector<PolicyHandle> pol(2, make_heuristic_policy(spec));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tr = run_episode(spec, pol, seed);
    ASSERT_EQ(tr.steps.size(), 10u);
    double sum = 0;
    for (const auto& s : tr.steps) sum += s.reward;
    EXPECT_DOUBLE_EQ(tr.total_return, sum);
    EXPECT_LE(tr.total_return, 3.0);
  }
}

TEST(Episode, TasksUnderRobotsAreAllCollected) {
  const auto spec = testing::make_spec(3, 3, 4, {{0, 0}, {2, 2}}, {{{0, 0}, 1}, {{2, 2}, 2}});
  const std::vector<PolicyHandle> pol(2, make_heuristic_policy(spec));
  const auto tr = run_episode(spec, pol, 1);
  EXPECT_DOUBLE_EQ(tr.total_return, 3.0);
  int acts = 0;
  for (const auto& s : tr.steps)
    for (Action a : s.joint) acts += a == Action::Act && s.reward > 0;
  EXPECT_GE(acts, 2);
}

TEST(Episode, PolicyCountMismatchIsConfigError) {
  const auto spec = testing::make_spec(3, 3, 4, {{0, 0}, {2, 2}});
  EXPECT_THROW(run_episode(spec, {make_heuristic_policy(spec)}, 0), ConfigError);
}

TEST(Episode, RecordedActionsAreThePolicyChoices) {
  const auto spec = testing::make_spec(6, 4, 10, {{0, 0}, {3, 5}}, {{{1, 2}, 2}, {{2, 4}, 1}}, 0.9);
  const std::vector<PolicyHandle> pol(2, make_heuristic_policy(spec));
  const auto tr = run_episode(spec, pol, 3);
  for (const auto& s : tr.steps)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(s.joint[i], heuristic_action(s.state, i, spec));
}

TEST(Evaluate, EmptyDomainGivesZero) {
  const auto spec = testing::make_spec(4, 4, 10, {{0, 0}, {3, 3}});
  const auto s = evaluate_policy(spec, std::vector<PolicyHandle>(2, make_heuristic_policy(spec)), 10, 1);
  EXPECT_EQ(s.n_episodes, 10u);
  EXPECT_DOUBLE_EQ(s.mean, 0.0);
  EXPECT_DOUBLE_EQ(s.sample_sd, 0.0);
}

TEST(Evaluate, ZeroEpisodesThrows) {
  const auto spec = testing::make_spec(4, 4, 10, {{0, 0}});
  EXPECT_THROW(evaluate_policy(spec, {make_heuristic_policy(spec)}, 0, 1), ArgumentError);
}

TEST(Evaluate, EpisodeSeedsAreDistinct) {
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 1000; ++i) seeds.insert(episode_seed(42, i));
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  const auto spec = testing::make_spec(6, 4, 10, {{0, 0}, {3, 5}}, {{{1, 2}, 2}, {{2, 4}, 1}}, 0.9);
  const std::vector<PolicyHandle> pol(2, make_heuristic_policy(spec));
  EXPECT_EQ(evaluate_policy(spec, pol, 40, 9, 1), evaluate_policy(spec, pol, 40, 9, 4));
}

}  // namespace
}  // namespace abc
