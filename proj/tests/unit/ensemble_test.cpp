#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "rler/corpus.hpp"
#include "rler/ensemble.hpp"
#include "rler/errors.hpp"
#include "rler/rewards.hpp"
#include "support.hpp"

using namespace rler;
using rler::test::L;

namespace {

SourceSummary summary(std::vector<std::tuple<std::int64_t, std::size_t, double>> cells) {
  SourceSummary s;
  for (const auto& [label, count, conf] : cells) s.total += count;
  for (const auto& [label, count, conf] : cells) {
    s.cells.push_back({L(label), count, static_cast<double>(count) / static_cast<double>(s.total),
                       conf});
  }
  return s;
}

// Group with `count` rollouts of each label, in order.
RolloutGroup counted_group(std::vector<std::pair<std::int64_t, std::size_t>> classes) {
  RolloutGroup g;
  g.question_id = 3;
  for (const auto& [label, n] : classes) {
    for (std::size_t i = 0; i < n; ++i) {
      Rollout r;
      r.question_id = 3;
      r.label = L(label);
      g.rollouts.push_back(r);
    }
  }
  return g;
}

UnifiedEstimate estimate_for(std::vector<std::int64_t> labels, std::vector<double> p_tilde,
                             std::int64_t m_ec, double alpha) {
  UnifiedEstimate e;
  for (auto l : labels) e.labels.push_back(L(l));
  e.p_tilde = std::move(p_tilde);
  e.m_ec = L(m_ec);
  e.alpha = alpha;
  return e;
}

}  // namespace

TEST(Mixture, ArithmeticMeanOfSources) {
  const std::vector<SourceSummary> s{summary({{1, 3, 0.5}, {2, 2, 0.5}}),
                                     summary({{1, 1, 0.5}, {2, 4, 0.5}})};
  const Mixture m = ensemble_mixture(s);
  ASSERT_EQ(m.labels.size(), 2u);
  EXPECT_NEAR(m.p_bar[0], 0.4, 1e-12);
  EXPECT_NEAR(m.p_bar[1], 0.6, 1e-12);
  EXPECT_EQ(m.m_ec, L(2));
}

TEST(Mixture, SingleSourceIsItsOwnDistribution) {
  const std::vector<SourceSummary> s{summary({{4, 1, 0.5}, {6, 3, 0.5}})};
  const Mixture m = ensemble_mixture(s);
  EXPECT_DOUBLE_EQ(m.p_bar_of(L(4)), 0.25);
  EXPECT_DOUBLE_EQ(m.p_bar_of(L(6)), 0.75);
  EXPECT_EQ(m.m_ec, sc_rewards(counted_group({{4, 1}, {6, 3}})).majority.value());
}

TEST(Mixture, MarginIsAtLeastTheMeanSourceMargin) {
  // Labels 1, 2, 3 with truth label 1; two sources on a 0.1 grid.
  auto margin = [](const std::vector<double>& p) {
    return p[0] - std::max(p[1], p[2]);
  };
  std::vector<std::vector<double>> simplex;
  for (int a = 0; a <= 10; ++a) {
    for (int b = 0; a + b <= 10; ++b) simplex.push_back({a / 10.0, b / 10.0, (10 - a - b) / 10.0});
  }
  std::size_t strict = 0;
  for (const auto& p1 : simplex) {
    for (const auto& p2 : simplex) {
      std::vector<double> bar(3);
      for (int j = 0; j < 3; ++j) bar[j] = 0.5 * (p1[j] + p2[j]);
      const double lhs = margin(bar), rhs = 0.5 * (margin(p1) + margin(p2));
      EXPECT_GE(lhs, rhs - 1e-12);
      if (lhs > rhs + 1e-12) ++strict;
    }
  }
  EXPECT_GT(strict, 0u);
  EXPECT_NEAR(margin({0.3, 0.45, 0.25}), -0.15, 1e-12);
  EXPECT_NEAR(0.5 * (margin({0.5, 0.3, 0.2}) + margin({0.1, 0.6, 0.3})), -0.15, 1e-12);
}

TEST(Bounds, MinAndMaxPerSource) {
  const std::vector<std::vector<SourceSummary>> one{{summary({{1, 1, 0.7}})}};
  const auto single = batch_confidence_bounds(one);
  EXPECT_EQ(single[0].lo, single[0].hi);

  const std::vector<std::vector<SourceSummary>> batch{
      {summary({{1, 2, 0.5}, {2, 1, 0.8}})}, {summary({{5, 3, 0.9}})}};
  const auto b = batch_confidence_bounds(batch);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].lo, 0.5);
  EXPECT_EQ(b[0].hi, 0.9);
}

TEST(UnifiedAlpha, WorkedExample) {
  const std::vector<SourceSummary> s{summary({{1, 3, 0.8}, {2, 1, 0.6}})};
  const std::vector<ConfidenceBounds> bounds{{0.5, 0.9}};
  const UnifiedEstimate e = unified_alpha(s, bounds);
  EXPECT_NEAR(e.C[0][0], 0.75, 1e-12);
  EXPECT_NEAR(e.C[0][1], 0.25, 1e-12);
  EXPECT_NEAR(e.S[0][0], 0.5625, 1e-12);
  EXPECT_NEAR(e.S[0][1], 0.0625, 1e-12);
  EXPECT_NEAR(e.s[0][0], 0.9, 1e-12);
  EXPECT_NEAR(e.s[0][1], 0.1, 1e-12);
  EXPECT_NEAR(e.p_tilde_of(L(1)), 0.9, 1e-12);
  EXPECT_EQ(e.m_ec, L(1));
  EXPECT_NEAR(e.alpha, 0.9, 1e-12);
}

TEST(UnifiedAlpha, DuplicatedSourceChangesNothing) {
  const SourceSummary one = summary({{1, 5, 0.7}, {2, 2, 0.55}, {9, 1, 0.9}});
  const std::vector<SourceSummary> single{one}, twin{one, one};
  const std::vector<ConfidenceBounds> b1{{0.5, 0.95}}, b2{{0.5, 0.95}, {0.5, 0.95}};
  const UnifiedEstimate a = unified_alpha(single, b1), b = unified_alpha(twin, b2);
  ASSERT_EQ(a.labels, b.labels);
  for (std::size_t j = 0; j < a.labels.size(); ++j) {
    EXPECT_NEAR(b.p_tilde[j], a.s[0][j], 1e-12);
  }
}

TEST(UnifiedAlpha, EqualConfidencesReduceToMeanFrequency) {
  const std::vector<SourceSummary> s{summary({{1, 5, 0.6}, {2, 3, 0.6}}),
                                     summary({{1, 2, 0.6}, {3, 6, 0.6}})};
  const std::vector<std::vector<SourceSummary>> batch{s};
  const auto bounds = batch_confidence_bounds(batch);
  const UnifiedEstimate e = unified_alpha(s, bounds);
  for (std::size_t k = 0; k < e.C.size(); ++k) {
    for (std::size_t j = 0; j < e.labels.size(); ++j) {
      if (e.P[k][j] > 0.0) EXPECT_EQ(e.C[k][j], 1.0);  // unseen answers stay at 0
    }
  }
  for (std::size_t j = 0; j < e.labels.size(); ++j) {
    EXPECT_NEAR(e.p_tilde[j], e.p_bar[j], 1e-12);
  }
}

TEST(UnifiedAlpha, VariantOneUsesTheAnnealedWeight) {
  const std::vector<SourceSummary> s{summary({{1, 3, 0.8}, {2, 1, 0.6}})};
  const std::vector<ConfidenceBounds> bounds{{0.5, 0.9}};
  const UnifiedEstimate e = unified_alpha(s, bounds, InterpolationVariant::v1, 0.3);
  EXPECT_EQ(e.alpha, 0.3);
  EXPECT_NEAR(e.p_tilde_of(L(1)), 0.75, 1e-12);
}

TEST(Selection, QuotaRulesWorkedExample) {
  const RolloutGroup g = counted_group({{10, 12}, {20, 3}, {30, 1}});
  const UnifiedEstimate e = estimate_for({10, 20, 30}, {0.75, 0.2, 0.05}, 10, 0.9);
  RngStream rng(1);
  const SelectionResult s = select_rollouts(g, e, rng);
  EXPECT_EQ(s.take, (std::vector<std::size_t>{11, 2, 1}));
  EXPECT_EQ(s.quota, (std::vector<std::size_t>{12, 3, 1}));
  EXPECT_EQ(s.budget, 14u);
  EXPECT_EQ(s.head_take, 11u);
  EXPECT_EQ(s.selected.size(), 14u);
  EXPECT_TRUE(std::is_sorted(s.selected.begin(), s.selected.end()));
  std::size_t head = 0;
  for (auto i : s.selected) head += g.rollouts[i].label == L(10) ? 1 : 0;
  EXPECT_EQ(head, 11u);
}

TEST(Selection, FullConfidenceKeepsEverything) {
  const RolloutGroup g = counted_group({{1, 9}, {2, 4}, {3, 3}});
  const UnifiedEstimate e = estimate_for({1, 2, 3}, {1.0, 0.0, 0.0}, 1, 1.0);
  RngStream rng(2);
  const SelectionResult s = select_rollouts(g, e, rng);
  EXPECT_EQ(s.budget, g.size());
  std::vector<std::size_t> all(g.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(s.selected, all);
}

TEST(Selection, ZeroAlphaDropsTheHead) {
  const RolloutGroup g = counted_group({{1, 9}, {2, 4}});
  RngStream rng(3);
  EXPECT_EQ(select_rollouts(g, estimate_for({1, 2}, {0.6, 0.4}, 1, 0.0), rng).head_take, 0u);
}

TEST(Selection, HeadTakeNonDecreasingInAlpha) {
  const RolloutGroup g = counted_group({{1, 13}, {2, 3}});
  std::size_t last = 0;
  for (int i = 0; i <= 100; ++i) {
    RngStream rng(4);
    const auto s = select_rollouts(g, estimate_for({1, 2}, {0.7, 0.3}, 1, i / 100.0), rng);
    EXPECT_GE(s.head_take, last);
    EXPECT_LE(s.head_take, s.head_quota);
    for (std::size_t j = 0; j < s.take.size(); ++j) EXPECT_LE(s.take[j], s.quota[j]);
    last = s.head_take;
  }
  EXPECT_EQ(last, 13u);
}

TEST(Selection, SelectAllKeepsEveryRollout) {
  const RolloutGroup g = counted_group({{1, 2}, {2, 5}});
  const SelectionResult s = select_all(g, L(2));
  EXPECT_EQ(s.budget, 7u);
  EXPECT_EQ(s.head_take, 5u);
  EXPECT_EQ(s.take, s.quota);
}

TEST(Allocation, DataShardSizes) {
  RngStream rng(5);
  const auto four = allocate_queries(4, 2, ShardingMode::data, rng);
  EXPECT_EQ(four[0].size(), 2u);
  EXPECT_EQ(four[1].size(), 2u);
  const auto five = allocate_queries(5, 2, ShardingMode::data, rng);
  EXPECT_EQ(five[0].size(), 3u);
  EXPECT_EQ(five[1].size(), 2u);
  std::set<std::size_t> seen;
  for (const auto& shard : five) {
    EXPECT_TRUE(std::is_sorted(shard.begin(), shard.end()));
    seen.insert(shard.begin(), shard.end());
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Allocation, ModelShardingGivesEveryQueryToEveryModel) {
  RngStream rng(6);
  for (const auto& shard : allocate_queries(6, 3, ShardingMode::model, rng)) {
    EXPECT_EQ(shard, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  }
  const auto split = split_rollouts(16, 2, rng);
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split[0].size(), 8u);
  EXPECT_EQ(split[1].size(), 8u);
  std::set<std::size_t> all(split[0].begin(), split[0].end());
  all.insert(split[1].begin(), split[1].end());
  EXPECT_EQ(all.size(), 16u);
}

class TrainStep : public ::testing::Test {
 protected:
  void SetUp() override {
    CorpusConfig c;
    c.n_questions = 64;
    data = gen_dataset(c);
    batch.assign(data.begin(), data.begin() + 16);
    const PolicyParams init = init_policy(15, 4);
    state.policies = {init, init};
    state.rollouts_per_source = 8;
    config.K = 2;
    config.G_k = 8;
    config.total_steps = 10;
  }
  std::vector<Question> data, batch;
  EnsembleState state;
  RlerConfig config;
};

TEST_F(TrainStep, DataShardingUpdatesEachQueryOnce) {
  const StepResult r = rler_train_step(state, batch, config, 1, 0);
  for (const auto& p : r.state.policies) EXPECT_EQ(p.step_count, 1);
  for (const auto& t : r.traces) {
    EXPECT_EQ(t.pooled.size(), 16u);
    EXPECT_LE(t.updated_by.size(), 1u);
  }
  std::size_t routed = 0;
  for (const auto& t : r.traces) routed += t.updated_by.size();
  EXPECT_GT(routed, 0u);
}

TEST_F(TrainStep, ModelShardingUpdatesEveryModel) {
  config.mode = ShardingMode::model;
  state.mode = ShardingMode::model;
  const StepResult r = rler_train_step(state, batch, config, 1, 0);
  for (const auto& t : r.traces) {
    if (!t.updated_by.empty()) EXPECT_EQ(t.updated_by.size(), 2u);
  }
}

TEST_F(TrainStep, BoundsFollowTheCurrentBatch) {
  config.learning_rate = 2.0;
  const StepResult first = rler_train_step(state, batch, config, 1, 0);
  const std::vector<Question> next(data.begin() + 16, data.begin() + 32);
  const StepResult second = rler_train_step(first.state, next, config, 1, 1);
  const auto& a = first.traces.front().estimate.bounds;
  const auto& b = second.traces.front().estimate.bounds;
  ASSERT_EQ(a.size(), 2u);
  EXPECT_TRUE(a[0].lo != b[0].lo || a[0].hi != b[0].hi || a[1].lo != b[1].lo ||
              a[1].hi != b[1].hi);
}

TEST_F(TrainStep, WorkerCountDoesNotChangeTheResult) {
  const StepResult one = rler_train_step(state, batch, config, 9, 3, 1);
  const StepResult four = rler_train_step(state, batch, config, 9, 3, 4);
  EXPECT_EQ(one.state.policies, four.state.policies);
}

TEST_F(TrainStep, InconsistentConfigRejected) {
  config.K = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}
