#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "rler/rng.hpp"

namespace rler {

/// A label distribution q with a designated truth index t. The majority m is
/// the unique argmax of q.
struct LabelDistribution {
  std::vector<double> q;
  std::size_t truth = 0;

  /// Argmax of q; throws ContractError when the maximum is shared.
  std::size_t majority() const;
  double truth_mass() const { return q.at(truth); }  // a
  double majority_mass() const { return q.at(majority()); }  // b
  double other_mass() const { return 1.0 - truth_mass() - majority_mass(); }  // o
  /// Largest mass outside {m, t}; 0 when there is no such label.
  double tail_max() const;
  double power_sum(int k) const;  // S_k = sum_j q_j^k
};

enum class RewardKind { hard, soft };

struct Correlations {
  double rho_hard = 0.0;
  double rho_soft = 0.0;
};

/// Closed forms for m != t:
///   rho_H = -sqrt(ab / ((1-a)(1-b)))
///   rho_S = -a (S2 - a) / sqrt(a (1-a) (S3 - S2^2))
/// Throws UndefinedCorrelation when any reward has zero variance and
/// ContractError when m == t.
Correlations closed_form_correlations(const LabelDistribution& dist);

/// Pearson correlation of a reward with the oracle reward, by enumerating the
/// L outcomes with their probabilities. Rewards are `scale * r + shift`.
double enumerated_correlation(const LabelDistribution& dist, RewardKind kind, double scale = 1.0,
                              double shift = 0.0);

/// E[(A - A*)^2] for standardized advantages, by outcome enumeration.
double enumerated_mse(const LabelDistribution& dist, RewardKind kind, double scale = 1.0,
                      double shift = 0.0);

struct MseResult {
  double rho = 0.0;
  /// 2 (1 - rho) with rho from the closed form (or exactly 1 when the hard
  /// reward coincides with the oracle).
  double from_correlation = 0.0;
  double enumerated = 0.0;
};

/// Both routes to the estimator's standardized-advantage MSE; throws
/// std::logic_error if they disagree by more than 1e-9.
MseResult exact_estimator_mse(const LabelDistribution& dist, RewardKind kind);

/// Sample correlations of SC and Freq rewards (empirical majority and
/// empirical frequencies of the draw) with the oracle over `group_size` draws.
Correlations empirical_correlations(const LabelDistribution& dist, std::size_t group_size,
                                    RngStream& rng);

struct GridPoint {
  std::vector<double> q;
  std::size_t truth = 0;
  std::size_t majority = 0;
  double a = 0.0;
  double b = 0.0;
  double s_max = 0.0;
  double mse_hard = 0.0;
  double mse_soft = 0.0;
  bool condition = false;  ///< a >= s_max (exact on the grid)
  bool holds = true;
};

struct Violation {
  std::string check;  ///< "closed_form", "sufficiency", "necessity", "dispersion"
  std::vector<double> q;
  std::size_t truth = 0;
  std::string detail;
};

struct TheoremReport {
  std::vector<GridPoint> points;
  std::vector<Violation> violations;
  std::size_t sufficiency_checked = 0;
  std::size_t necessity_checked = 0;
  std::size_t dispersion_pairs_checked = 0;
  std::size_t skipped_ties = 0;
  std::size_t skipped_undefined = 0;
  double max_closed_form_gap = 0.0;
};

/// Exhaustive check over the simplex grid with spacing `step` (which must
/// divide 1) for L in {3, 4, 5}: closed forms against enumeration, the
/// sufficiency direction, necessity at the concentrated tail, and tail
/// dispersion monotonicity of |rho_S|.
TheoremReport verify_theorem_grid(std::size_t labels, double step);

/// CSV with columns a,b,s_max,mse_h,mse_s,holds.
void write_theorem_csv(const std::filesystem::path& path, const TheoremReport& report);

}  // namespace rler
