#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rler/label.hpp"
#include "rler/rollout.hpp"

namespace rler {

/// (1/G) sum |r_i - r*_i|.
double noise_rate(const RewardSet& r, const RewardSet& r_star);

/// 1 - (1/G) sum |r_i - r~_i|.
double selffeedback_rate(const RewardSet& r, const RewardSet& r_tilde);

/// FN/FP ratio. Division by a zero FP never happens: a positive FN over a
/// zero FP is the `infinite` sentinel and 0/0 is `undefined`.
struct BalanceRatio {
  enum class Kind { finite, infinite, undefined };
  Kind kind = Kind::undefined;
  double value = 0.0;  // meaningful only when finite

  static BalanceRatio of(double fn, double fp);
  bool is_finite() const { return kind == Kind::finite; }
  std::string text() const;
};

struct SymmetryReport {
  double fn = 0.0;
  double fp = 0.0;
  BalanceRatio br_ir;
  /// Pr(r* = 1) over the group.
  double oracle_accuracy = 0.0;
  /// acc / (1 - acc); absent when the oracle accuracy is 0 or 1.
  std::optional<double> br_sym;
  /// br_ir - br_sym; absent unless both are finite.
  std::optional<double> rho_symbias;
};

SymmetryReport symmetry_report(const RewardSet& r, const RewardSet& r_star);

struct AtK {
  double avg = 0.0;
  double pass = 0.0;
  double maj = 0.0;
};

/// Avg@k, Pass@k and Maj@k of k sampled answers against the truth.
AtK eval_at_k(std::span<const AnswerLabel> labels, const AnswerLabel& truth);

struct GainMetrics {
  double interpolation_gain = 0.0;
  double diversity_gain = 0.0;
};

/// mean_i (|r^H_i - r*_i| - |r_i - r*_i|).
double interpolation_gain(const RewardSet& hard, const RewardSet& interp, const RewardSet& r_star);

/// Acc(m^EC) - mean over sources of Acc(m_k), both over the same questions.
/// per_source_correct is indexed [source][question].
double diversity_gain(const std::vector<bool>& ensemble_correct,
                      const std::vector<std::vector<bool>>& per_source_correct);

/// Single-question form of both gains.
GainMetrics gain_metrics(const RewardSet& hard, const RewardSet& interp, const RewardSet& r_star,
                         bool ensemble_maj_correct, const std::vector<bool>& per_source_maj_correct);

/// Every per-question metric of one training group.
struct QuestionBias {
  double rho_noise = 0.0;
  double rho_selfbias = 0.0;
  double fn = 0.0;
  double fp = 0.0;
  BalanceRatio br_ir;
  std::optional<double> br_sym;
  std::optional<double> rho_symbias;
  double oracle_accuracy = 0.0;
  /// Whether the predicted label m (or m^EC) equals the truth.
  bool majority_correct = false;
};

QuestionBias assess_question(const RewardSet& r, const RewardSet& r_star, const RewardSet& r_tilde,
                             bool majority_correct);

/// Batch aggregates: unweighted means over the questions where each metric is
/// defined. rho_selfbias_true/err average over questions with m == t / m != t.
struct BiasReport {
  std::size_t questions = 0;
  double rho_noise = 0.0;
  double rho_selfbias = 0.0;
  std::optional<double> rho_selfbias_true;
  std::optional<double> rho_selfbias_err;
  double fn = 0.0;
  double fp = 0.0;
  std::optional<double> br_ir;
  std::size_t br_ir_infinite = 0;
  std::optional<double> rho_symbias;
  double oracle_accuracy = 0.0;
};

BiasReport aggregate_bias(std::span<const QuestionBias> questions);

}  // namespace rler
