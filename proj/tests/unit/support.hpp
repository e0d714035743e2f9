#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "rler/rollout.hpp"

namespace rler::test {

inline AnswerLabel L(std::int64_t v) { return AnswerLabel(v); }

/// Group whose rollouts carry the given labels, all from source 0.
inline RolloutGroup group_of(std::initializer_list<std::int64_t> labels, std::int64_t qid = 1) {
  RolloutGroup g;
  g.question_id = qid;
  std::size_t slot = 0;
  for (auto v : labels) {
    Rollout r;
    r.question_id = qid;
    r.label = AnswerLabel(v);
    r.slot = slot++;
    g.rollouts.push_back(r);
  }
  return g;
}

inline RewardSet reward_set(std::vector<double> values, std::int64_t qid = 1) {
  RewardSet r;
  r.question_id = qid;
  r.rewards = std::move(values);
  return r;
}

}  // namespace rler::test
