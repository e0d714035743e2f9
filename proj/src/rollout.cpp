#include "rler/rollout.hpp"

#include <algorithm>
#include <string>

#include "rler/errors.hpp"

namespace rler {

std::vector<AnswerLabel> RolloutGroup::labels() const {
  std::vector<AnswerLabel> out;
  out.reserve(rollouts.size());
  for (const auto& r : rollouts) out.push_back(r.label);
  return out;
}

std::size_t RolloutGroup::source_count() const {
  std::size_t n = 0;
  for (const auto& r : rollouts) n = std::max(n, r.source + 1);
  return n;
}

std::vector<std::size_t> RolloutGroup::source_indices(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    if (rollouts[i].source == k) out.push_back(i);
  }
  return out;
}

RolloutGroup RolloutGroup::subset(const std::vector<std::size_t>& indices) const {
  RolloutGroup out{question_id, policy_row, {}};
  out.rollouts.reserve(indices.size());
  for (std::size_t i : indices) out.rollouts.push_back(rollouts.at(i));
  return out;
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::oracle:
      return "oracle";
    case Estimator::sc:
      return "sc";
    case Estimator::freq:
      return "freq";
    case Estimator::judge:
      return "judge";
    case Estimator::interp:
      return "interp";
    case Estimator::forged:
      return "forged";
  }
  return "?";
}

RewardSet RewardSet::subset(const std::vector<std::size_t>& indices) const {
  RewardSet out{question_id, {}, estimator, alpha, majority};
  out.rewards.reserve(indices.size());
  for (std::size_t i : indices) out.rewards.push_back(rewards.at(i));
  return out;
}

void require_aligned(const RewardSet& a, const RewardSet& b, std::string_view what) {
  if (a.question_id != b.question_id) {
    throw ContractError(std::string(what) + ": reward sets belong to different questions (" +
                        std::to_string(a.question_id) + " vs " + std::to_string(b.question_id) + ")");
  }
  if (a.size() != b.size()) {
    throw ContractError(std::string(what) + ": reward sets differ in length (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace rler
