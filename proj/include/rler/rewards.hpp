#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rler/label.hpp"
#include "rler/rng.hpp"
#include "rler/rollout.hpp"

namespace rler {

/// Empirical answer distribution of a label multiset, entries sorted by label.
class AnswerHistogram {
 public:
  struct Entry {
    AnswerLabel label;
    std::size_t count = 0;
  };

  explicit AnswerHistogram(std::span<const AnswerLabel> labels);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t total() const { return total_; }

  /// Most frequent label; ties go to the numerically smallest label.
  const AnswerLabel& majority() const;
  /// Empirical probability p_j (0 for unseen labels).
  double frequency(const AnswerLabel& label) const;
  std::size_t count(const AnswerLabel& label) const;

 private:
  std::vector<Entry> entries_;
  std::size_t total_ = 0;
};

/// r*_i = 1 iff label_i == truth.
RewardSet oracle_rewards(const RolloutGroup& group, const AnswerLabel& truth);

/// Self-consistency: r_i = 1[label_i == m] with m the empirical majority.
RewardSet sc_rewards(const RolloutGroup& group);

/// Frequency: r_i = p_{label_i}.
RewardSet freq_rewards(const RolloutGroup& group);

/// Simulated judge: each rollout receives the oracle verdict with probability
/// `acc_on_correct` (truthful rollouts) or `acc_on_incorrect` (wrong ones),
/// and the flipped verdict otherwise. One uniform draw per rollout.
RewardSet judge_rewards(const RolloutGroup& group, const AnswerLabel& truth, double acc_on_correct,
                        double acc_on_incorrect, RngStream& rng);

/// (1 - alpha) * hard + alpha * soft, elementwise.
RewardSet interpolate_rewards(const RewardSet& hard, const RewardSet& soft, double alpha);

}  // namespace rler
