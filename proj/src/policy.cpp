#include "rler/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "rler/errors.hpp"

namespace rler {

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - top) / temperature);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> PolicyParams::probabilities(std::size_t g, double temperature) const {
  return softmax(row(g), temperature);
}

std::size_t PolicyParams::greedy_slot(std::size_t g) const {
  const auto r = row(g);
  return static_cast<std::size_t>(std::distance(r.begin(), std::max_element(r.begin(), r.end())));
}

double initial_correct_probability(std::size_t n_groups, std::size_t g, const PolicyInit& spec) {
  if (n_groups <= 1) return spec.p_high;
  const double t = static_cast<double>(g) / static_cast<double>(n_groups - 1);
  return spec.p_high + (spec.p_low - spec.p_high) * t;
}

PolicyParams init_policy(std::size_t n_groups, std::size_t n_slots, const PolicyInit& spec) {
  if (n_groups < 1) throw ConfigError("policy: need at least one group");
  if (n_slots < 2) throw ConfigError("policy: need at least two slots");
  if (!(spec.p_high > 0.0 && spec.p_high < 1.0 && spec.p_low > 0.0 && spec.p_low < 1.0)) {
    throw ConfigError("policy: p_high and p_low must lie in (0, 1)");
  }
  PolicyParams params(n_groups, n_slots);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const double p = initial_correct_probability(n_groups, g, spec);
    const double rest = (1.0 - p) / static_cast<double>(n_slots - 1);
    auto row = params.row(g);
    // Log-probabilities are valid logits; softmax recovers p exactly up to rounding.
    row[0] = std::log(p);
    for (std::size_t s = 1; s < n_slots; ++s) row[s] = std::log(rest);
  }
  return params;
}

std::vector<Rollout> sample_rollouts(const PolicyParams& policy, const Question& question,
                                     std::size_t count, std::size_t source, RngStream& rng,
                                     double temperature) {
  if (question.group >= policy.n_groups) {
    throw ContractError("sample_rollouts: question " + std::to_string(question.id) +
                        " has group " + std::to_string(question.group) + " outside the policy");
  }
  if (question.candidates.size() != policy.n_slots) {
    throw ContractError("sample_rollouts: candidate count does not match policy slots");
  }
  const std::vector<double> probs = policy.probabilities(question.group, temperature);
  std::vector<Rollout> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    std::size_t slot = probs.size() - 1;
    double cumulative = 0.0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
      cumulative += probs[s];
      if (u < cumulative) {
        slot = s;
        break;
      }
    }
    out.push_back(Rollout{question.id, source, question.candidates[slot], slot, probs[slot]});
  }
  return out;
}

std::vector<double> standardized_advantages(std::span<const double> rewards) {
  if (rewards.empty()) return {};
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  // Equal rewards carry no preference; tiny float residue must not be amplified.
  if (*hi - *lo <= 1e-12) return {};
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

PolicyParams apply_policy_gradient(const PolicyParams& policy,
                                   std::span<const RolloutGroup> groups,
                                   std::span<const std::vector<double>> advantages,
                                   double learning_rate, double temperature) {
  if (groups.size() != advantages.size()) {
    throw ContractError("apply_policy_gradient: " + std::to_string(groups.size()) +
                        " groups but " + std::to_string(advantages.size()) + " advantage vectors");
  }
  PolicyParams next = policy;
  std::vector<double> grad(policy.logits.size(), 0.0);
  for (std::size_t q = 0; q < groups.size(); ++q) {
    const RolloutGroup& group = groups[q];
    const std::vector<double>& adv = advantages[q];
    if (adv.empty()) continue;
    if (adv.size() != group.size()) {
      throw ContractError("apply_policy_gradient: advantages misaligned with rollouts for question " +
                          std::to_string(group.question_id));
    }
    if (group.policy_row >= policy.n_groups) {
      throw ContractError("apply_policy_gradient: policy row out of range");
    }
    const std::vector<double> probs = policy.probabilities(group.policy_row, temperature);
    double* g = grad.data() + group.policy_row * policy.n_slots;
    for (std::size_t i = 0; i < group.size(); ++i) {
      const double a = adv[i] / temperature;
      for (std::size_t s = 0; s < policy.n_slots; ++s) g[s] -= a * probs[s];
      g[group.rollouts[i].slot] += a;
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i) next.logits[i] += learning_rate * grad[i];
  next.step_count += 1;
  return next;
}

PolicyParams grpo_update(const PolicyParams& policy, std::span<const RolloutGroup> groups,
                         std::span<const RewardSet> rewards, double learning_rate,
                         double temperature) {
  if (groups.size() != rewards.size()) {
    throw ContractError("grpo_update: " + std::to_string(groups.size()) + " rollout groups but " +
                        std::to_string(rewards.size()) + " reward sets");
  }
  std::vector<std::vector<double>> advantages;
  advantages.reserve(groups.size());
  for (std::size_t q = 0; q < groups.size(); ++q) {
    if (rewards[q].question_id != groups[q].question_id || rewards[q].size() != groups[q].size()) {
      throw ContractError("grpo_update: rewards misaligned with rollouts for question " +
                          std::to_string(groups[q].question_id));
    }
    advantages.push_back(standardized_advantages(rewards[q].rewards));
  }
  return apply_policy_gradient(policy, groups, advantages, learning_rate, temperature);
}

double greedy_accuracy(const PolicyParams& policy, std::span<const Question> dataset) {
  if (dataset.empty()) throw ContractError("greedy_accuracy: empty dataset");
  std::size_t correct = 0;
  for (const auto& q : dataset) {
    if (policy.greedy_slot(q.group) == 0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// Format: a magic line, a header line "n_groups L step_count", then one
// whitespace-separated row of logits per group in shortest round-trip form.
void write_checkpoint(const std::filesystem::path& path, const PolicyParams& policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "rler-policy v1\n";
  out << policy.n_groups << ' ' << policy.n_slots << ' ' << policy.step_count << '\n';
  for (std::size_t g = 0; g < policy.n_groups; ++g) {
    const auto r = policy.row(g);
    for (std::size_t s = 0; s < r.size(); ++s) {
      if (s > 0) out << ' ';
      out << format_double(r[s]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

PolicyParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != "rler-policy v1") {
    throw ParseError(1, "not a policy checkpoint");
  }
  if (!std::getline(in, line)) throw ParseError(2, "missing header");
  std::istringstream header(line);
  std::size_t groups = 0, slots = 0;
  std::int64_t steps = 0;
  if (!(header >> groups >> slots >> steps) || groups == 0 || slots < 2) {
    throw ParseError(2, "bad header '" + line + "'");
  }
  PolicyParams params(groups, slots);
  params.step_count = steps;
  for (std::size_t g = 0; g < groups; ++g) {
    if (!std::getline(in, line)) throw ParseError(3 + g, "missing row");
    auto row = params.row(g);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t s = 0; s < slots; ++s) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || !std::isfinite(v)) {
        throw ParseError(3 + g, "bad logit in row " + std::to_string(g));
      }
      row[s] = v;
      p = res.ptr;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw ParseError(3 + g, "trailing data in row " + std::to_string(g));
  }
  return params;
}

}  // namespace rler
