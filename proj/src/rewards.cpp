#include "rler/rewards.hpp"

#include <algorithm>
#include <string>

#include "rler/errors.hpp"

namespace rler {

AnswerHistogram::AnswerHistogram(std::span<const AnswerLabel> labels) : total_(labels.size()) {
  std::vector<AnswerLabel> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto& l : sorted) {
    if (!entries_.empty() && entries_.back().label == l) {
      ++entries_.back().count;
    } else {
      entries_.push_back({std::move(l), 1});
    }
  }
}

const AnswerLabel& AnswerHistogram::majority() const {
  if (entries_.empty()) throw ContractError("majority of an empty label set");
  // Entries are sorted ascending, so strict '>' keeps the smallest label on ties.
  const Entry* best = &entries_.front();
  for (const auto& e : entries_) {
    if (e.count > best->count) best = &e;
  }
  return best->label;
}

std::size_t AnswerHistogram::count(const AnswerLabel& label) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), label,
                                   [](const Entry& e, const AnswerLabel& l) { return e.label < l; });
  return (it != entries_.end() && it->label == label) ? it->count : 0;
}

double AnswerHistogram::frequency(const AnswerLabel& label) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(label)) / static_cast<double>(total_);
}

RewardSet oracle_rewards(const RolloutGroup& group, const AnswerLabel& truth) {
  RewardSet out{group.question_id, {}, Estimator::oracle, std::nullopt, std::nullopt};
  out.rewards.reserve(group.size());
  for (const auto& r : group.rollouts) out.rewards.push_back(r.label == truth ? 1.0 : 0.0);
  return out;
}

RewardSet sc_rewards(const RolloutGroup& group) {
  if (group.rollouts.empty()) throw ContractError("sc_rewards: empty rollout group");
  const auto labels = group.labels();
  const AnswerHistogram hist(labels);
  const AnswerLabel& m = hist.majority();
  RewardSet out{group.question_id, {}, Estimator::sc, std::nullopt, m};
  out.rewards.reserve(labels.size());
  for (const auto& l : labels) out.rewards.push_back(l == m ? 1.0 : 0.0);
  return out;
}

RewardSet freq_rewards(const RolloutGroup& group) {
  if (group.rollouts.empty()) throw ContractError("freq_rewards: empty rollout group");
  const auto labels = group.labels();
  const AnswerHistogram hist(labels);
  RewardSet out{group.question_id, {}, Estimator::freq, std::nullopt, hist.majority()};
  out.rewards.reserve(labels.size());
  for (const auto& l : labels) out.rewards.push_back(hist.frequency(l));
  return out;
}

RewardSet judge_rewards(const RolloutGroup& group, const AnswerLabel& truth, double acc_on_correct,
                        double acc_on_incorrect, RngStream& rng) {
  if (acc_on_correct < 0.0 || acc_on_correct > 1.0 || acc_on_incorrect < 0.0 ||
      acc_on_incorrect > 1.0) {
    throw ContractError("judge_rewards: accuracies must lie in [0, 1]");
  }
  RewardSet out{group.question_id, {}, Estimator::judge, std::nullopt, std::nullopt};
  out.rewards.reserve(group.size());
  for (const auto& r : group.rollouts) {
    const bool correct = r.label == truth;
    const double verdict = correct ? 1.0 : 0.0;
    const double acc = correct ? acc_on_correct : acc_on_incorrect;
    out.rewards.push_back(rng.uniform() < acc ? verdict : 1.0 - verdict);
  }
  return out;
}

RewardSet interpolate_rewards(const RewardSet& hard, const RewardSet& soft, double alpha) {
  require_aligned(hard, soft, "interpolate_rewards");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("interpolate_rewards: alpha must lie in [0, 1]");
  }
  RewardSet out{hard.question_id, {}, Estimator::interp, alpha, hard.majority};
  out.rewards.resize(hard.size());
  for (std::size_t i = 0; i < hard.size(); ++i) {
    out.rewards[i] = (1.0 - alpha) * hard.rewards[i] + alpha * soft.rewards[i];
  }
  return out;
}

}  // namespace rler
