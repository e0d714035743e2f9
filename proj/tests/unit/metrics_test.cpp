#include <gtest/gtest.h>

#include <cmath>

#include "rler/metrics.hpp"
#include "rler/rewards.hpp"
#include "support.hpp"

using namespace rler;
using rler::test::group_of;
using rler::test::L;
using rler::test::reward_set;

namespace {

// Ten rollouts: five on m=1, two on the truth t=2, then 3 and 3 and 4.
RolloutGroup ten_rollouts() { return group_of({1, 1, 1, 1, 1, 2, 2, 3, 3, 4}); }

}  // namespace

TEST(NoiseRate, DirectFormula) {
  EXPECT_DOUBLE_EQ(noise_rate(reward_set({1, 1, 0, 1}), reward_set({0, 0, 0, 1})), 0.5);
  EXPECT_EQ(noise_rate(reward_set({1, 0, 1}), reward_set({1, 0, 1})), 0.0);
}

TEST(NoiseRate, ScWithWrongMajorityIsPmPlusPt) {
  const auto g = ten_rollouts();
  EXPECT_NEAR(noise_rate(sc_rewards(g), oracle_rewards(g, L(2))), 0.7, 1e-12);
}

TEST(NoiseRate, MisalignedSetsAreRejected) {
  EXPECT_THROW(noise_rate(reward_set({1, 0}), reward_set({1})), std::invalid_argument);
  EXPECT_THROW(noise_rate(reward_set({1}, 1), reward_set({1}, 2)), std::invalid_argument);
}

TEST(SelfFeedback, Extremes) {
  EXPECT_EQ(selffeedback_rate(reward_set({1, 0, 0.5}), reward_set({1, 0, 0.5})), 1.0);
  EXPECT_EQ(selffeedback_rate(reward_set({1, 0}), reward_set({0, 1})), 0.0);
}

TEST(SelfFeedback, JudgeAgainstScMatchesEnumeration) {
  // m = 3 while the truth is 1.
  const auto g = group_of({3, 3, 1, 2});
  const AnswerLabel truth = L(1);
  const RewardSet star = oracle_rewards(g, truth);
  const RewardSet tilde = sc_rewards(g);
  const double acc = 0.8;

  // Exact expectation over the 2^4 judge verdict patterns.
  double expected = 0.0;
  for (unsigned mask = 0; mask < 16; ++mask) {
    double prob = 1.0;
    RewardSet r = star;
    for (std::size_t i = 0; i < 4; ++i) {
      const bool flipped = (mask >> i) & 1u;
      prob *= flipped ? 1.0 - acc : acc;
      if (flipped) r.rewards[i] = 1.0 - r.rewards[i];
    }
    expected += prob * selffeedback_rate(r, tilde);
  }
  EXPECT_NEAR(expected, 0.35, 1e-12);

  RngStream rng(5);
  double sum = 0.0;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    sum += selffeedback_rate(judge_rewards(g, truth, acc, acc, rng), tilde);
  }
  EXPECT_NEAR(sum / draws, expected, 0.01);
}

TEST(Symmetry, ScExampleWithWrongMajority) {
  const auto g = ten_rollouts();
  const SymmetryReport s = symmetry_report(sc_rewards(g), oracle_rewards(g, L(2)));
  EXPECT_NEAR(s.fn, 0.2, 1e-12);
  EXPECT_NEAR(s.fp, 0.5, 1e-12);
  ASSERT_TRUE(s.br_ir.is_finite());
  EXPECT_NEAR(s.br_ir.value, 0.4, 1e-12);
  EXPECT_NEAR(s.oracle_accuracy, 0.2, 1e-12);
  ASSERT_TRUE(s.br_sym && s.rho_symbias);
  EXPECT_NEAR(*s.br_sym, 0.25, 1e-12);
  EXPECT_NEAR(*s.rho_symbias, 0.15, 1e-12);
}

TEST(Symmetry, PerfectRewardsHaveUndefinedRatio) {
  const SymmetryReport s = symmetry_report(reward_set({1, 0}), reward_set({1, 0}));
  EXPECT_EQ(s.fn, 0.0);
  EXPECT_EQ(s.fp, 0.0);
  EXPECT_EQ(s.br_ir.kind, BalanceRatio::Kind::undefined);
  EXPECT_FALSE(s.rho_symbias);
}

TEST(Symmetry, PureUnderRewardIsInfinite) {
  const SymmetryReport s = symmetry_report(reward_set({0, 0}), reward_set({1, 0}));
  EXPECT_EQ(s.fp, 0.0);
  EXPECT_DOUBLE_EQ(s.fn, 0.5);
  EXPECT_EQ(s.br_ir.kind, BalanceRatio::Kind::infinite);
  EXPECT_EQ(s.br_ir.text(), "inf");
  EXPECT_FALSE(s.rho_symbias);
}

TEST(AtK, CorrectnessPatterns) {
  const AnswerLabel t = L(1);
  const std::vector<AnswerLabel> mixed{L(1), L(2), L(3), L(1)};
  const AtK a = eval_at_k(mixed, t);
  EXPECT_DOUBLE_EQ(a.avg, 0.5);
  EXPECT_DOUBLE_EQ(a.pass, 1.0);

  const std::vector<AnswerLabel> wrong{L(2), L(2), L(3)};
  const AtK b = eval_at_k(wrong, t);
  EXPECT_EQ(b.avg, 0.0);
  EXPECT_EQ(b.pass, 0.0);
  EXPECT_EQ(b.maj, 0.0);

  const std::vector<AnswerLabel> minority{L(4), L(4), L(9)};
  const AtK c = eval_at_k(minority, L(9));
  EXPECT_DOUBLE_EQ(c.avg, 1.0 / 3.0);
  EXPECT_EQ(c.pass, 1.0);
  EXPECT_EQ(c.maj, 0.0);
}

TEST(Gains, IdentityInterpolationHasNoGain) {
  const auto g = ten_rollouts();
  const RewardSet hard = sc_rewards(g);
  const RewardSet mix = interpolate_rewards(hard, freq_rewards(g), 0.0);
  EXPECT_EQ(interpolation_gain(hard, mix, oracle_rewards(g, L(2))), 0.0);
}

TEST(Gains, FullInterpolationGainMatchesIdentity) {
  // p = 0.5 on m, 0.3 on t, 0.2 on a single other answer.
  const auto g = group_of({1, 1, 1, 1, 1, 2, 2, 2, 3, 3});
  const RewardSet hard = sc_rewards(g);
  const RewardSet mix = interpolate_rewards(hard, freq_rewards(g), 1.0);
  const RewardSet star = oracle_rewards(g, L(2));
  EXPECT_NEAR(interpolation_gain(hard, mix, star), 0.25 + 0.09 - 0.04, 1e-12);
  // Same quantity by direct enumeration of per-rollout error differences.
  double direct = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    direct += std::abs(hard.rewards[i] - star.rewards[i]) - std::abs(mix.rewards[i] - star.rewards[i]);
  }
  EXPECT_NEAR(direct / 10.0, 0.30, 1e-12);
}

TEST(Gains, EnsembleCoveringEverySourceIsNonNegative) {
  const std::vector<bool> ensemble{true, true, false, true};
  const std::vector<std::vector<bool>> sources{{true, false, false, true},
                                               {false, true, false, true}};
  EXPECT_GE(diversity_gain(ensemble, sources), 0.0);
  EXPECT_DOUBLE_EQ(diversity_gain(ensemble, sources), 0.75 - 0.5);
}

TEST(Aggregate, MeansOverDefinedValues) {
  const auto g = ten_rollouts();
  const RewardSet sc = sc_rewards(g);
  std::vector<QuestionBias> qs;
  qs.push_back(assess_question(sc, oracle_rewards(g, L(2)), sc, false));   // finite 0.4
  qs.push_back(assess_question(reward_set({0, 0}), reward_set({1, 0}), reward_set({0, 0}), true));
  const BiasReport b = aggregate_bias(qs);
  EXPECT_EQ(b.questions, 2u);
  ASSERT_TRUE(b.br_ir);
  EXPECT_NEAR(*b.br_ir, 0.4, 1e-12);
  EXPECT_EQ(b.br_ir_infinite, 1u);
  EXPECT_NEAR(b.rho_noise, (0.7 + 0.5) / 2, 1e-12);
  ASSERT_TRUE(b.rho_selfbias_true && b.rho_selfbias_err);
  EXPECT_DOUBLE_EQ(*b.rho_selfbias_true, 1.0);
  EXPECT_DOUBLE_EQ(*b.rho_selfbias_err, 1.0);
}
