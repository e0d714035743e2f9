#include "rler/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "rler/errors.hpp"

namespace rler {

namespace {

double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace

std::size_t trim_keep_count(std::size_t d, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ContractError("trim fraction must lie in (0, 1]");
  }
  const double raw = std::ceil(fraction * static_cast<double>(d) - 1e-9);
  return std::min(d, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::vector<double> trim_task_vector(std::span<const double> v, double fraction) {
  const std::size_t keep = trim_keep_count(v.size(), fraction);
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < keep; ++i) out[order[i]] = v[order[i]];
  return out;
}

PolicyParams ties_merge(std::span<const PolicyParams> policies, const MergeConfig& config) {
  if (policies.empty()) throw ContractError("ties_merge: no policies");
  if (!(config.scale >= 0.0 && config.scale <= 1.0)) {
    throw ContractError("ties_merge: scale must lie in [0, 1]");
  }
  const PolicyParams& base = config.base;
  for (const auto& p : policies) {
    if (p.n_groups != base.n_groups || p.n_slots != base.n_slots) {
      throw ContractError("ties_merge: policy dimensions do not match the base");
    }
  }
  const std::size_t d = base.logits.size();

  std::vector<std::vector<double>> trimmed;
  trimmed.reserve(policies.size());
  for (const auto& p : policies) {
    std::vector<double> tv(d);
    for (std::size_t i = 0; i < d; ++i) tv[i] = p.logits[i] - base.logits[i];
    trimmed.push_back(trim_task_vector(tv, config.trim_fraction));
  }

  PolicyParams merged = base;
  std::int64_t steps = 0;
  for (const auto& p : policies) steps = std::max(steps, p.step_count);
  merged.step_count = steps;

  std::vector<double> positive, negative, agreeing;
  for (std::size_t i = 0; i < d; ++i) {
    positive.clear();
    negative.clear();
    for (const auto& tv : trimmed) {
      if (tv[i] > 0.0) positive.push_back(tv[i]);
      if (tv[i] < 0.0) negative.push_back(-tv[i]);
    }
    const double up = sorted_sum(positive);
    const double down = sorted_sum(negative);
    if (up == down) continue;  // includes the all-zero coordinate
    agreeing = up > down ? positive : negative;
    const double sign = up > down ? 1.0 : -1.0;
    if (config.scale == 1.0) {
      // Full-scale merge of policies that agree on the coordinate returns their
      // shared value itself rather than base + (value - base), which can be off
      // by an ulp.
      std::optional<double> shared;
      bool same = true;
      for (std::size_t k = 0; k < trimmed.size() && same; ++k) {
        if (trimmed[k][i] * sign <= 0.0) continue;
        const double value = policies[k].logits[i];
        if (shared && *shared != value) same = false;
        shared = value;
      }
      if (same && shared) {
        merged.logits[i] = *shared;
        continue;
      }
    }
    double mean;
    if (std::adjacent_find(agreeing.begin(), agreeing.end(), std::not_equal_to<>()) ==
        agreeing.end()) {
      mean = agreeing.front();  // unanimous values merge to themselves exactly
    } else {
      mean = sorted_sum(agreeing) / static_cast<double>(agreeing.size());
    }
    merged.logits[i] = base.logits[i] + config.scale * sign * mean;
  }
  return merged;
}

}  // namespace rler
