#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rler/corpus.hpp"
#include "rler/ensemble.hpp"
#include "rler/noise_forge.hpp"
#include "rler/policy.hpp"

namespace rler {

enum class EstimatorChoice { oracle, sc, freq, judge, rler };

std::string_view estimator_choice_name(EstimatorChoice e);
EstimatorChoice parse_estimator_choice(std::string_view text);

/// Which self-estimate r~ the self-feedback metric compares against.
/// `automatic` uses the estimator's own output for sc and freq, the SC
/// indicator for oracle, judge and forged rewards, and each rollout's source
/// majority indicator for rler.
enum class SelfEstimate { automatic, own, sc };

struct JudgeConfig {
  double acc_correct = 0.8;
  double acc_incorrect = 0.8;
};

struct RlerSection {
  std::size_t K = 2;
  std::size_t G_k = 8;
  ShardingMode mode = ShardingMode::data;
  InterpolationVariant interpolation = InterpolationVariant::v3;
  bool selection = true;
  std::optional<double> alpha_fixed;
  /// Standard deviation of Gaussian noise added to each member's initial
  /// logits (members are otherwise identical).
  double init_jitter = 0.0;
  AdvantageScope advantage_scope = AdvantageScope::selected;
};

struct TrainingConfig {
  std::int64_t steps = 2000;
  std::size_t batch_size = 32;
  std::size_t G = 16;
  double learning_rate = 0.05;
  double temperature = 1.0;
};

struct EvalConfig {
  std::size_t k = 16;
  std::int64_t eval_every = 100;
  std::size_t n_questions = 500;
  std::uint64_t seed = 1000003;
};

struct ExperimentConfig {
  CorpusConfig corpus;
  PolicyInit policy;
  EstimatorChoice estimator = EstimatorChoice::sc;
  SelfEstimate self_estimate = SelfEstimate::automatic;
  JudgeConfig judge;
  NoiseDials noise;
  RlerSection rler;
  TrainingConfig training;
  EvalConfig eval;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  /// Rollouts per question for the chosen estimator (K * G_k for rler).
  std::size_t group_size() const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses INI text with the sections corpus, policy, estimator, judge, noise,
/// rler, training, eval and run. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field, in a form parse_config reads back to an equal config.
std::string to_ini(const ExperimentConfig& config);

/// Sets one key. `key` is "section.name" or a bare name, which resolves to
/// the first section holding it in file order (so "n_questions" is the corpus
/// size); the bare name "estimator" means estimator.name.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

}  // namespace rler
