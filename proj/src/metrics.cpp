#include "rler/metrics.hpp"

#include <cmath>

#include "rler/errors.hpp"
#include "rler/rewards.hpp"

namespace rler {

double noise_rate(const RewardSet& r, const RewardSet& r_star) {
  require_aligned(r, r_star, "noise_rate");
  if (r.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += std::abs(r.rewards[i] - r_star.rewards[i]);
  return sum / static_cast<double>(r.size());
}

double selffeedback_rate(const RewardSet& r, const RewardSet& r_tilde) {
  require_aligned(r, r_tilde, "selffeedback_rate");
  if (r.size() == 0) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += std::abs(r.rewards[i] - r_tilde.rewards[i]);
  return 1.0 - sum / static_cast<double>(r.size());
}

BalanceRatio BalanceRatio::of(double fn, double fp) {
  if (fp > 0.0) return {Kind::finite, fn / fp};
  if (fn > 0.0) return {Kind::infinite, 0.0};
  return {Kind::undefined, 0.0};
}

std::string BalanceRatio::text() const {
  switch (kind) {
    case Kind::finite:
      return std::to_string(value);
    case Kind::infinite:
      return "inf";
    case Kind::undefined:
      break;
  }
  return "undefined";
}

SymmetryReport symmetry_report(const RewardSet& r, const RewardSet& r_star) {
  require_aligned(r, r_star, "symmetry_report");
  SymmetryReport out;
  const std::size_t n = r.size();
  if (n == 0) return out;
  double fn = 0.0, fp = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = r.rewards[i] - r_star.rewards[i];
    if (d < 0) fn += -d;
    if (d > 0) fp += d;
    acc += r_star.rewards[i];
  }
  const double g = static_cast<double>(n);
  out.fn = fn / g;
  out.fp = fp / g;
  out.oracle_accuracy = acc / g;
  out.br_ir = BalanceRatio::of(out.fn, out.fp);
  if (out.oracle_accuracy > 0.0 && out.oracle_accuracy < 1.0) {
    out.br_sym = out.oracle_accuracy / (1.0 - out.oracle_accuracy);
    if (out.br_ir.is_finite()) out.rho_symbias = out.br_ir.value - *out.br_sym;
  }
  return out;
}

AtK eval_at_k(std::span<const AnswerLabel> labels, const AnswerLabel& truth) {
  if (labels.empty()) throw ContractError("eval_at_k: k must be at least 1");
  std::size_t correct = 0;
  for (const auto& l : labels) correct += (l == truth) ? 1 : 0;
  AtK out;
  out.avg = static_cast<double>(correct) / static_cast<double>(labels.size());
  out.pass = correct > 0 ? 1.0 : 0.0;
  out.maj = AnswerHistogram(labels).majority() == truth ? 1.0 : 0.0;
  return out;
}

double interpolation_gain(const RewardSet& hard, const RewardSet& interp, const RewardSet& r_star) {
  require_aligned(hard, r_star, "interpolation_gain");
  require_aligned(interp, r_star, "interpolation_gain");
  if (hard.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < hard.size(); ++i) {
    sum += std::abs(hard.rewards[i] - r_star.rewards[i]) - std::abs(interp.rewards[i] - r_star.rewards[i]);
  }
  return sum / static_cast<double>(hard.size());
}

double diversity_gain(const std::vector<bool>& ensemble_correct,
                      const std::vector<std::vector<bool>>& per_source_correct) {
  if (per_source_correct.empty()) throw ContractError("diversity_gain: no sources");
  if (ensemble_correct.empty()) return 0.0;
  const double n = static_cast<double>(ensemble_correct.size());
  double ensemble = 0.0;
  for (bool c : ensemble_correct) ensemble += c ? 1.0 : 0.0;
  double individual = 0.0;
  for (const auto& source : per_source_correct) {
    if (source.size() != ensemble_correct.size()) {
      throw ContractError("diversity_gain: per-source list misaligned with ensemble list");
    }
    double acc = 0.0;
    for (bool c : source) acc += c ? 1.0 : 0.0;
    individual += acc / n;
  }
  return ensemble / n - individual / static_cast<double>(per_source_correct.size());
}

GainMetrics gain_metrics(const RewardSet& hard, const RewardSet& interp, const RewardSet& r_star,
                         bool ensemble_maj_correct, const std::vector<bool>& per_source_maj_correct) {
  if (per_source_maj_correct.empty()) throw ContractError("gain_metrics: no sources");
  GainMetrics out;
  out.interpolation_gain = interpolation_gain(hard, interp, r_star);
  double individual = 0.0;
  for (bool c : per_source_maj_correct) individual += c ? 1.0 : 0.0;
  out.diversity_gain = (ensemble_maj_correct ? 1.0 : 0.0) -
                       individual / static_cast<double>(per_source_maj_correct.size());
  return out;
}

QuestionBias assess_question(const RewardSet& r, const RewardSet& r_star, const RewardSet& r_tilde,
                             bool majority_correct) {
  QuestionBias q;
  q.rho_noise = noise_rate(r, r_star);
  q.rho_selfbias = selffeedback_rate(r, r_tilde);
  const SymmetryReport sym = symmetry_report(r, r_star);
  q.fn = sym.fn;
  q.fp = sym.fp;
  q.br_ir = sym.br_ir;
  q.br_sym = sym.br_sym;
  q.rho_symbias = sym.rho_symbias;
  q.oracle_accuracy = sym.oracle_accuracy;
  q.majority_correct = majority_correct;
  return q;
}

namespace {

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> get() const {
    return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
  }
};

}  // namespace

BiasReport aggregate_bias(std::span<const QuestionBias> questions) {
  BiasReport out;
  out.questions = questions.size();
  if (questions.empty()) return out;
  Mean noise, self, self_true, self_err, fn, fp, br, sym, acc;
  for (const auto& q : questions) {
    noise.add(q.rho_noise);
    self.add(q.rho_selfbias);
    (q.majority_correct ? self_true : self_err).add(q.rho_selfbias);
    fn.add(q.fn);
    fp.add(q.fp);
    if (q.br_ir.is_finite()) br.add(q.br_ir.value);
    if (q.br_ir.kind == BalanceRatio::Kind::infinite) ++out.br_ir_infinite;
    if (q.rho_symbias) sym.add(*q.rho_symbias);
    acc.add(q.oracle_accuracy);
  }
  out.rho_noise = *noise.get();
  out.rho_selfbias = *self.get();
  out.rho_selfbias_true = self_true.get();
  out.rho_selfbias_err = self_err.get();
  out.fn = *fn.get();
  out.fp = *fp.get();
  out.br_ir = br.get();
  out.rho_symbias = sym.get();
  out.oracle_accuracy = *acc.get();
  return out;
}

}  // namespace rler
