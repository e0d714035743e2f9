#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rler/label.hpp"

namespace rler {

/// One sampled answer. `confidence` is the emitting policy's probability of
/// `slot` at sampling time (the single-step stand-in for mean token probability).
struct Rollout {
  std::int64_t question_id = 0;
  std::size_t source = 0;
  AnswerLabel label;
  std::size_t slot = 0;
  double confidence = 1.0;
};

/// Pooled rollouts for one question, in source order.
struct RolloutGroup {
  std::int64_t question_id = 0;
  /// Logit row (difficulty group) the question's rollouts were drawn from.
  std::size_t policy_row = 0;
  std::vector<Rollout> rollouts;

  std::size_t size() const { return rollouts.size(); }
  std::vector<AnswerLabel> labels() const;
  /// Number of distinct sources, taken as 1 + the largest source index.
  std::size_t source_count() const;
  /// Indices of the rollouts emitted by source k.
  std::vector<std::size_t> source_indices(std::size_t k) const;
  /// Copy containing only the listed rollouts, in the listed order.
  RolloutGroup subset(const std::vector<std::size_t>& indices) const;
};

enum class Estimator { oracle, sc, freq, judge, interp, forged };

std::string_view estimator_name(Estimator e);

/// Rewards aligned one-to-one with a rollout group.
struct RewardSet {
  std::int64_t question_id = 0;
  std::vector<double> rewards;
  Estimator estimator = Estimator::oracle;
  std::optional<double> alpha;
  /// Predicted label m (or m^EC) when the estimator defines one.
  std::optional<AnswerLabel> majority;

  std::size_t size() const { return rewards.size(); }
  RewardSet subset(const std::vector<std::size_t>& indices) const;
};

/// Throws ContractError unless both sets cover the same question with the
/// same number of rewards.
void require_aligned(const RewardSet& a, const RewardSet& b, std::string_view what);

}  // namespace rler
