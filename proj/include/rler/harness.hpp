#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rler/config.hpp"
#include "rler/metrics.hpp"
#include "rler/policy.hpp"

namespace rler {

/// One row of metrics.csv. Undefined values are NaN (written as "nan"); an
/// all-infinite balance ratio is +inf.
struct StepMetrics {
  std::int64_t step = 0;
  double rho_noise = 0.0;
  double rho_selfbias = 0.0;
  double rho_selfbias_true = 0.0;
  double rho_selfbias_err = 0.0;
  double fn = 0.0;
  double fp = 0.0;
  double br_ir = 0.0;
  double rho_symbias = 0.0;
  double avg_at_k = 0.0;
  double pass_at_k = 0.0;
  double maj_at_k = 0.0;
  double interp_gain = 0.0;
  double diversity_gain = 0.0;
  double greedy_acc = 0.0;
};

/// Column header of metrics.csv.
extern const char* const kMetricsHeader;

/// Per-step selection accounting for rler runs. The noise columns cover only
/// questions whose ensemble majority is wrong.
struct SelectionStep {
  std::int64_t step = 0;
  std::size_t wrong_questions = 0;
  double noise_selected = 0.0;  ///< mean over those questions
  double noise_all = 0.0;
  std::size_t right_questions = 0;
  double head_take_right = 0.0;  ///< mean head take when m^EC == t
  double head_take_wrong = 0.0;  ///< mean head take when m^EC != t
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<StepMetrics> rows;
  std::vector<SelectionStep> selection;
  /// Hash of every policy's parameters after each step.
  std::vector<std::uint64_t> trajectory;
  std::vector<PolicyParams> policies;
  /// The single policy, or the ties-merge of the ensemble.
  PolicyParams deployable;
  /// Greedy correctness (0 or 1) of the deployable policy per group, and the
  /// number of training questions in each group.
  std::vector<double> group_greedy;
  std::vector<std::size_t> group_sizes;
  /// Final Avg/Pass/Maj@k of each ensemble member (one entry for K = 1).
  std::vector<AtK> member_at_k;

  const StepMetrics& final_row() const { return rows.back(); }
  /// Mean of a column over the steps where it is finite.
  double column_mean(double StepMetrics::*column) const;
  /// Greedy accuracy restricted to groups whose initial correct-slot
  /// probability satisfies lo <= p <= hi.
  double greedy_accuracy_between(const PolicyInit& init, double lo, double hi) const;
};

/// Trains one seed. When `out_dir` is given, writes metrics.csv (plus
/// selection.csv for rler), config.ini and policy checkpoints there.
SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                    std::size_t workers = 1);

/// Runs every configured seed into out_dir/seed_<N>, seeds in parallel.
std::vector<SeedResult> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path& out_dir, std::size_t workers);

struct SummaryRow {
  std::string value;
  std::uint64_t seed = 0;
  double final_greedy_acc = 0.0;
  double mean_rho_noise = 0.0;
  double mean_rho_selfbias = 0.0;
  double mean_fn = 0.0;
  double mean_fp = 0.0;
  double mean_rho_symbias = 0.0;
  double avg_at_k = 0.0;
  double pass_at_k = 0.0;
  double maj_at_k = 0.0;
};

SummaryRow summarize(const std::string& value, const SeedResult& result);

/// One run per (value, seed) under out_dir/<axis>=<value>/seed_<N>, plus
/// out_dir/summary.csv sorted by value (numerically when every value is a
/// number). Throws ConfigError for an unknown axis or invalid value before
/// any run starts.
std::vector<SummaryRow> sweep(const ExperimentConfig& base, const std::string& axis,
                              const std::vector<std::string>& values,
                              const std::filesystem::path& out_dir, std::size_t workers);

/// Plot-ready pivots. For a sweep directory: pivot.csv with seed means per
/// value. For a run directory: curves.csv with seed-mean metrics per step.
/// Returns the written file.
std::filesystem::path report(const std::filesystem::path& dir);

/// Bitwise hash of a set of policies (FNV-1a over the logits and step counts).
std::uint64_t policy_hash(const std::vector<PolicyParams>& policies);

/// Shortest round-trip text for a double, "nan" or "inf" for non-finite values.
std::string format_metric(double v);

}  // namespace rler
