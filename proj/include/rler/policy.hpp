#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rler/corpus.hpp"
#include "rler/rng.hpp"
#include "rler/rollout.hpp"

namespace rler {

/// Tabular softmax policy: one logit row per difficulty group, one column per
/// candidate slot. Slot 0 always holds the ground truth.
struct PolicyParams {
  std::size_t n_groups = 0;
  std::size_t n_slots = 0;
  std::vector<double> logits;  // row-major, n_groups x n_slots
  std::int64_t step_count = 0;

  PolicyParams() = default;
  PolicyParams(std::size_t groups, std::size_t slots)
      : n_groups(groups), n_slots(slots), logits(groups * slots, 0.0) {}

  std::span<const double> row(std::size_t g) const {
    return {logits.data() + g * n_slots, n_slots};
  }
  std::span<double> row(std::size_t g) { return {logits.data() + g * n_slots, n_slots}; }

  /// softmax(row(g) / temperature).
  std::vector<double> probabilities(std::size_t g, double temperature = 1.0) const;
  /// Lowest slot index among the row maxima.
  std::size_t greedy_slot(std::size_t g) const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

/// Numerically stable softmax of `logits / temperature`.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

struct PolicyInit {
  /// Correct-slot probability of group 0 and of the last group; groups in
  /// between are interpolated linearly.
  double p_high = 0.9;
  double p_low = 0.1;
};

PolicyParams init_policy(std::size_t n_groups, std::size_t n_slots, const PolicyInit& spec = {});

/// Correct-slot probability init_policy assigns to group g.
double initial_correct_probability(std::size_t n_groups, std::size_t g, const PolicyInit& spec);

std::vector<Rollout> sample_rollouts(const PolicyParams& policy, const Question& question,
                                     std::size_t count, std::size_t source, RngStream& rng,
                                     double temperature = 1.0);

/// Group-standardized advantages with the population standard deviation.
/// Returns an empty vector when the rewards have no spread (the group is
/// skipped by the update).
std::vector<double> standardized_advantages(std::span<const double> rewards);

/// Adds lr * sum_i A_i * d log pi(slot_i) / d row to each group's row. All
/// gradients are taken at the incoming parameters; step_count is incremented.
PolicyParams apply_policy_gradient(const PolicyParams& policy,
                                   std::span<const RolloutGroup> groups,
                                   std::span<const std::vector<double>> advantages,
                                   double learning_rate, double temperature = 1.0);

/// GRPO step: standardize each group's rewards, skip zero-spread groups,
/// then apply_policy_gradient.
PolicyParams grpo_update(const PolicyParams& policy, std::span<const RolloutGroup> groups,
                         std::span<const RewardSet> rewards, double learning_rate,
                         double temperature = 1.0);

/// Fraction of questions whose group's greedy slot is the truth (slot 0).
double greedy_accuracy(const PolicyParams& policy, std::span<const Question> dataset);

void write_checkpoint(const std::filesystem::path& path, const PolicyParams& policy);
PolicyParams read_checkpoint(const std::filesystem::path& path);

}  // namespace rler
