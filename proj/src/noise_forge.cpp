#include "rler/noise_forge.hpp"

#include "rler/errors.hpp"

namespace rler {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void NoiseDials::validate() const {
  if (!in_unit(eps_sym) || !in_unit(eps_fn) || !in_unit(eps_fp) || !in_unit(lambda_couple)) {
    throw ConfigError("noise: every dial must lie in [0, 1]");
  }
}

RewardSet forge_rewards(const RewardSet& r_star, const RewardSet& r_tilde, const NoiseDials& dials,
                        RngStream& rng) {
  require_aligned(r_star, r_tilde, "forge_rewards");
  for (double v : r_star.rewards) {
    if (v != 0.0 && v != 1.0) throw ContractError("forge_rewards: oracle rewards must be binary");
  }
  dials.validate();
  RewardSet out{r_star.question_id, {}, Estimator::forged, std::nullopt, r_tilde.majority};
  out.rewards.reserve(r_star.size());
  for (std::size_t i = 0; i < r_star.size(); ++i) {
    const double u_sym = rng.uniform();
    const double u_asym = rng.uniform();
    const double u_couple = rng.uniform();
    double r = r_star.rewards[i];
    if (u_sym < dials.eps_sym) r = 1.0 - r;
    if (r == 1.0 ? u_asym < dials.eps_fn : u_asym < dials.eps_fp) r = 1.0 - r;
    if (u_couple < dials.lambda_couple) r = r_tilde.rewards[i];
    out.rewards.push_back(r);
  }
  return out;
}

DialEffects expected_dial_effects(const NoiseDials& dials, double oracle_accuracy,
                                  const std::optional<SelfEstimateProfile>& profile) {
  dials.validate();
  if (!(oracle_accuracy > 0.0 && oracle_accuracy < 1.0)) {
    throw ContractError("expected_dial_effects: oracle accuracy must lie in (0, 1)");
  }
  if (dials.lambda_couple > 0.0 && !profile) {
    throw ContractError("expected_dial_effects: coupling needs a self-estimate profile");
  }
  const double e = dials.eps_sym;
  // Pr(r = 1 | r* = 1) and Pr(r = 1 | r* = 0) after stages 1 and 2.
  double one_if_correct = (1.0 - e) * (1.0 - dials.eps_fn) + e * dials.eps_fp;
  double one_if_wrong = e * (1.0 - dials.eps_fn) + (1.0 - e) * dials.eps_fp;
  if (profile) {
    const double l = dials.lambda_couple;
    one_if_correct = (1.0 - l) * one_if_correct + l * profile->p_one_given_correct;
    one_if_wrong = (1.0 - l) * one_if_wrong + l * profile->p_one_given_incorrect;
  }
  DialEffects out;
  out.fn = oracle_accuracy * (1.0 - one_if_correct);
  out.fp = (1.0 - oracle_accuracy) * one_if_wrong;
  out.rho_noise = out.fn + out.fp;
  out.br_ir = BalanceRatio::of(out.fn, out.fp);
  out.br_sym = oracle_accuracy / (1.0 - oracle_accuracy);
  return out;
}

}  // namespace rler
