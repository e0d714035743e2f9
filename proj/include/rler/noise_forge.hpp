#pragma once

#include <optional>

#include "rler/metrics.hpp"
#include "rler/rng.hpp"
#include "rler/rollout.hpp"

namespace rler {

/// Controls for building rewards with a chosen noise rate, FN/FP balance and
/// self-feedback coupling out of oracle rewards.
struct NoiseDials {
  double eps_sym = 0.0;        ///< stage 1: flip any reward
  double eps_fn = 0.0;         ///< stage 2: flip a current 1 to 0
  double eps_fp = 0.0;         ///< stage 2: flip a current 0 to 1
  double lambda_couple = 0.0;  ///< stage 3: replace with the self-estimate

  bool is_zero() const {
    return eps_sym == 0.0 && eps_fn == 0.0 && eps_fp == 0.0 && lambda_couple == 0.0;
  }
  /// Throws ConfigError unless every dial lies in [0, 1].
  void validate() const;
};

/// Applies the three stages in order (symmetric, asymmetric, coupling). Each
/// rollout consumes exactly three uniforms regardless of the dial values, so
/// sweeps that share a stream differ only where a threshold moves.
RewardSet forge_rewards(const RewardSet& r_star, const RewardSet& r_tilde, const NoiseDials& dials,
                        RngStream& rng);

/// Joint behaviour of a binary self-estimate against the oracle, needed to
/// predict the coupling stage.
struct SelfEstimateProfile {
  double p_one_given_correct = 1.0;    ///< Pr(r~ = 1 | r* = 1)
  double p_one_given_incorrect = 0.0;  ///< Pr(r~ = 1 | r* = 0)
};

struct DialEffects {
  double rho_noise = 0.0;
  double fn = 0.0;
  double fp = 0.0;
  BalanceRatio br_ir;
  double br_sym = 0.0;
};

/// Closed-form expectations under the dials for a rollout population with the
/// given oracle accuracy (in (0, 1)). A nonzero lambda_couple needs a profile.
DialEffects expected_dial_effects(const NoiseDials& dials, double oracle_accuracy,
                                  const std::optional<SelfEstimateProfile>& profile = std::nullopt);

}  // namespace rler
