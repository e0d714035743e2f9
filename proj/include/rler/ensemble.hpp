#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rler/corpus.hpp"
#include "rler/label.hpp"
#include "rler/policy.hpp"
#include "rler/rng.hpp"
#include "rler/rollout.hpp"

namespace rler {

/// Per-answer statistics of one source's rollouts for one question.
struct SourceCell {
  AnswerLabel label;
  std::size_t count = 0;
  double frequency = 0.0;        ///< P_k(j)
  double mean_confidence = 0.0;  ///< lbar_k(j)
};

struct SourceSummary {
  std::size_t total = 0;
  std::vector<SourceCell> cells;  ///< sorted by label

  const SourceCell* find(const AnswerLabel& label) const;
};

/// Summaries for sources 0..K-1 of a pooled group. Every source must have at
/// least one rollout.
std::vector<SourceSummary> summarize_sources(const RolloutGroup& group, std::size_t sources);

struct Mixture {
  std::vector<AnswerLabel> labels;  ///< union of observed answers, sorted
  std::vector<double> p_bar;        ///< aligned with labels
  AnswerLabel m_ec;

  double p_bar_of(const AnswerLabel& label) const;
};

/// p_bar_j = (1/K) sum_k P_k(j); m^EC is its argmax, ties to the smallest label.
Mixture ensemble_mixture(std::span<const SourceSummary> sources);

struct ConfidenceBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-source min and max of lbar_k(j) over every (question, answer) cell in
/// the batch. batch[q][k] is source k's summary of question q.
std::vector<ConfidenceBounds> batch_confidence_bounds(
    std::span<const std::vector<SourceSummary>> batch);

enum class InterpolationVariant {
  off,  ///< hard rewards only
  v1,   ///< alpha annealed from 1 to 0 over training
  v2,   ///< S = P * lbar, no batch normalization, no renormalization
  v3,   ///< full pipeline
};

std::string_view variant_name(InterpolationVariant v);
InterpolationVariant parse_variant(std::string_view text);

struct UnifiedEstimate {
  std::vector<AnswerLabel> labels;  ///< union of observed answers, sorted
  // Indexed [source][answer], aligned with labels.
  std::vector<std::vector<double>> P;
  std::vector<std::vector<double>> lbar;
  std::vector<std::vector<double>> C;
  std::vector<std::vector<double>> S;
  std::vector<std::vector<double>> s;
  std::vector<double> p_bar;
  std::vector<double> p_tilde;
  AnswerLabel m_ec;
  double alpha = 0.0;
  std::vector<ConfidenceBounds> bounds;

  std::size_t index_of(const AnswerLabel& label) const;
  double p_tilde_of(const AnswerLabel& label) const;
};

/// Unified answer-confidence estimate and the interpolation weight
/// alpha = clip(p_tilde(m^EC), 0, 1). For v1 the caller supplies the annealed
/// weight in `annealed_alpha` and p_tilde is the mixture itself; `off`
/// computes the full estimate (it only changes how rewards are mixed).
UnifiedEstimate unified_alpha(std::span<const SourceSummary> sources,
                              std::span<const ConfidenceBounds> bounds,
                              InterpolationVariant variant = InterpolationVariant::v3,
                              double annealed_alpha = 1.0);

struct SelectionResult {
  std::vector<std::size_t> selected;  ///< ascending rollout indices
  std::vector<AnswerLabel> labels;    ///< answer classes, sorted
  std::vector<std::size_t> quota;     ///< n_y, aligned with labels
  std::vector<std::size_t> take;      ///< take_y, aligned with labels
  std::size_t head_quota = 0;
  std::size_t head_take = 0;
  std::size_t budget = 0;  ///< b(x)
};

/// Every rollout, quotas equal to takes.
SelectionResult select_all(const RolloutGroup& group, const AnswerLabel& head);

/// Head take min(n_m, round(n_m * alpha)); tail take min(n_j, round(n_j * (1 - p_tilde_j)));
/// rollouts drawn uniformly without replacement within each class.
SelectionResult select_rollouts(const RolloutGroup& group, const UnifiedEstimate& estimate,
                                RngStream& rng);

enum class ShardingMode { data, model };

std::string_view sharding_name(ShardingMode m);
ShardingMode parse_sharding(std::string_view text);

/// Data sharding: a seeded shuffle of 0..n-1 dealt round-robin to K shards,
/// each shard sorted ascending. Model sharding: every model gets every query.
std::vector<std::vector<std::size_t>> allocate_queries(std::size_t n_queries, std::size_t K,
                                                       ShardingMode mode, RngStream& rng);

/// Seeded even split of G pooled rollouts into K ascending index lists.
std::vector<std::vector<std::size_t>> split_rollouts(std::size_t G, std::size_t K,
                                                     RngStream& rng);

struct EnsembleState {
  std::vector<PolicyParams> policies;
  ShardingMode mode = ShardingMode::data;
  std::size_t rollouts_per_source = 8;
};

enum class AdvantageScope { selected, pooled };

struct RlerConfig {
  std::size_t K = 2;
  std::size_t G_k = 8;
  ShardingMode mode = ShardingMode::data;
  InterpolationVariant interpolation = InterpolationVariant::v3;
  bool selection = true;
  /// Overrides the reward interpolation weight (selection still uses the
  /// estimate's alpha).
  std::optional<double> alpha_fixed;
  AdvantageScope advantage_scope = AdvantageScope::selected;
  double learning_rate = 0.05;
  double temperature = 1.0;
  /// Horizon of the v1 annealing schedule.
  std::int64_t total_steps = 1;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct QuestionTrace {
  std::int64_t question_id = 0;
  AnswerLabel truth;
  RolloutGroup pooled;
  std::vector<SourceSummary> sources;
  UnifiedEstimate estimate;
  RewardSet hard;
  RewardSet soft;
  RewardSet interp;
  double reward_alpha = 0.0;
  SelectionResult selection;
  /// Per-source SC majority labels m_k.
  std::vector<AnswerLabel> source_majority;
  /// Models that updated on this question.
  std::vector<std::size_t> updated_by;
};

struct StepResult {
  EnsembleState state;
  std::vector<QuestionTrace> traces;
};

/// One RLER step over `batch` at training step `step`. Sampling, estimation
/// and selection run on `workers` threads against the incoming parameters;
/// model updates are applied afterwards in model order. Output does not
/// depend on the worker count.
StepResult rler_train_step(const EnsembleState& state, std::span<const Question> batch,
                           const RlerConfig& config, std::uint64_t seed, std::int64_t step,
                           std::size_t workers = 1);

}  // namespace rler
