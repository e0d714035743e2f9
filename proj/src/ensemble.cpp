#include "rler/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rler/errors.hpp"
#include "rler/parallel.hpp"
#include "rler/rewards.hpp"

namespace rler {

namespace {

std::size_t find_label(const std::vector<AnswerLabel>& labels, const AnswerLabel& label) {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) return labels.size();
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<AnswerLabel> label_union(std::span<const SourceSummary> sources) {
  std::vector<AnswerLabel> labels;
  for (const auto& src : sources) {
    for (const auto& cell : src.cells) labels.push_back(cell.label);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

// Argmax with ties to the smallest label; labels are sorted ascending.
std::size_t argmax_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

void shuffle(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

const SourceCell* SourceSummary::find(const AnswerLabel& label) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), label,
                                   [](const SourceCell& c, const AnswerLabel& l) { return c.label < l; });
  return (it != cells.end() && it->label == label) ? &*it : nullptr;
}

std::vector<SourceSummary> summarize_sources(const RolloutGroup& group, std::size_t sources) {
  std::vector<SourceSummary> out(sources);
  for (std::size_t k = 0; k < sources; ++k) {
    const std::vector<std::size_t> idx = group.source_indices(k);
    if (idx.empty()) {
      throw ContractError("summarize_sources: source " + std::to_string(k) +
                          " has no rollouts for question " + std::to_string(group.question_id));
    }
    std::vector<std::size_t> order = idx;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return group.rollouts[a].label < group.rollouts[b].label;
    });
    SourceSummary& s = out[k];
    s.total = idx.size();
    for (std::size_t i : order) {
      const Rollout& r = group.rollouts[i];
      if (s.cells.empty() || s.cells.back().label != r.label) s.cells.push_back({r.label, 0, 0.0, 0.0});
      ++s.cells.back().count;
      s.cells.back().mean_confidence += r.confidence;
    }
    for (auto& c : s.cells) {
      c.frequency = static_cast<double>(c.count) / static_cast<double>(s.total);
      c.mean_confidence /= static_cast<double>(c.count);
    }
  }
  return out;
}

double Mixture::p_bar_of(const AnswerLabel& label) const {
  const std::size_t j = find_label(labels, label);
  return j < labels.size() ? p_bar[j] : 0.0;
}

Mixture ensemble_mixture(std::span<const SourceSummary> sources) {
  if (sources.empty()) throw ContractError("ensemble_mixture: no sources");
  Mixture out;
  out.labels = label_union(sources);
  if (out.labels.empty()) throw ContractError("ensemble_mixture: empty source");
  out.p_bar.assign(out.labels.size(), 0.0);
  for (std::size_t j = 0; j < out.labels.size(); ++j) {
    double total = 0.0;
    for (const auto& src : sources) {
      if (const SourceCell* c = src.find(out.labels[j])) total += c->frequency;
    }
    out.p_bar[j] = total / static_cast<double>(sources.size());
  }
  out.m_ec = out.labels[argmax_first(out.p_bar)];
  return out;
}

std::vector<ConfidenceBounds> batch_confidence_bounds(
    std::span<const std::vector<SourceSummary>> batch) {
  if (batch.empty()) throw ContractError("batch_confidence_bounds: empty batch");
  const std::size_t K = batch.front().size();
  std::vector<ConfidenceBounds> out(K);
  std::vector<bool> seen(K, false);
  for (const auto& question : batch) {
    if (question.size() != K) throw ContractError("batch_confidence_bounds: ragged source count");
    for (std::size_t k = 0; k < K; ++k) {
      for (const auto& c : question[k].cells) {
        if (!seen[k]) {
          out[k] = {c.mean_confidence, c.mean_confidence};
          seen[k] = true;
        } else {
          out[k].lo = std::min(out[k].lo, c.mean_confidence);
          out[k].hi = std::max(out[k].hi, c.mean_confidence);
        }
      }
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!seen[k]) throw ContractError("batch_confidence_bounds: source without answers");
  }
  return out;
}

std::string_view variant_name(InterpolationVariant v) {
  switch (v) {
    case InterpolationVariant::off: return "off";
    case InterpolationVariant::v1: return "v1";
    case InterpolationVariant::v2: return "v2";
    case InterpolationVariant::v3: return "v3";
  }
  return "?";
}

InterpolationVariant parse_variant(std::string_view text) {
  if (text == "off") return InterpolationVariant::off;
  if (text == "v1") return InterpolationVariant::v1;
  if (text == "v2") return InterpolationVariant::v2;
  if (text == "v3") return InterpolationVariant::v3;
  throw ConfigError("unknown interpolation variant '" + std::string(text) + "'");
}

std::size_t UnifiedEstimate::index_of(const AnswerLabel& label) const {
  return find_label(labels, label);
}

double UnifiedEstimate::p_tilde_of(const AnswerLabel& label) const {
  const std::size_t j = index_of(label);
  return j < labels.size() ? p_tilde[j] : 0.0;
}

UnifiedEstimate unified_alpha(std::span<const SourceSummary> sources,
                              std::span<const ConfidenceBounds> bounds,
                              InterpolationVariant variant, double annealed_alpha) {
  if (sources.size() != bounds.size()) {
    throw ContractError("unified_alpha: one confidence bound per source is required");
  }
  const Mixture mix = ensemble_mixture(sources);
  const std::size_t K = sources.size();
  const std::size_t J = mix.labels.size();

  UnifiedEstimate est;
  est.labels = mix.labels;
  est.p_bar = mix.p_bar;
  est.m_ec = mix.m_ec;
  est.bounds.assign(bounds.begin(), bounds.end());
  est.P.assign(K, std::vector<double>(J, 0.0));
  est.lbar = est.C = est.S = est.s = est.P;
  est.p_tilde.assign(J, 0.0);

  for (std::size_t k = 0; k < K; ++k) {
    const double width = bounds[k].hi - bounds[k].lo;
    for (std::size_t j = 0; j < J; ++j) {
      const SourceCell* c = sources[k].find(est.labels[j]);
      if (!c) continue;  // unseen answers keep zeros throughout
      est.P[k][j] = c->frequency;
      est.lbar[k][j] = c->mean_confidence;
      switch (variant) {
        case InterpolationVariant::v1:
          est.C[k][j] = 1.0;
          est.S[k][j] = c->frequency;
          break;
        case InterpolationVariant::v2:
          est.C[k][j] = 1.0;
          est.S[k][j] = c->frequency * c->mean_confidence;
          break;
        default:
          est.C[k][j] = width > 0.0 ? (c->mean_confidence - bounds[k].lo) / width : 1.0;
          est.S[k][j] = c->frequency * est.C[k][j];
          break;
      }
    }
    if (variant == InterpolationVariant::v2) {
      est.s[k] = est.S[k];
    } else {
      const double total = std::accumulate(est.S[k].begin(), est.S[k].end(), 0.0);
      for (std::size_t j = 0; j < J; ++j) {
        est.s[k][j] = total > 0.0 ? est.S[k][j] / total : est.P[k][j];
      }
    }
  }
  for (std::size_t j = 0; j < J; ++j) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += est.s[k][j];
    est.p_tilde[j] = total / static_cast<double>(K);
  }
  const double raw = variant == InterpolationVariant::v1 ? annealed_alpha
                                                         : est.p_tilde[est.index_of(est.m_ec)];
  est.alpha = std::clamp(raw, 0.0, 1.0);
  return est;
}

SelectionResult select_all(const RolloutGroup& group, const AnswerLabel& head) {
  const AnswerHistogram hist(group.labels());
  SelectionResult out;
  out.selected.resize(group.size());
  std::iota(out.selected.begin(), out.selected.end(), std::size_t{0});
  for (const auto& e : hist.entries()) {
    out.labels.push_back(e.label);
    out.quota.push_back(e.count);
    out.take.push_back(e.count);
  }
  out.head_quota = out.head_take = hist.count(head);
  out.budget = group.size();
  return out;
}

SelectionResult select_rollouts(const RolloutGroup& group, const UnifiedEstimate& estimate,
                                RngStream& rng) {
  const AnswerHistogram hist(group.labels());
  SelectionResult out;
  for (const auto& e : hist.entries()) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group.rollouts[i].label == e.label) members.push_back(i);
    }
    const bool head = e.label == estimate.m_ec;
    const double weight = head ? estimate.alpha : 1.0 - estimate.p_tilde_of(e.label);
    const double n = static_cast<double>(e.count);
    // std::round rounds halves away from zero.
    const auto want = static_cast<std::size_t>(std::max(0.0, std::round(n * weight)));
    const std::size_t take = std::min(e.count, want);

    // Partial Fisher-Yates: the first `take` entries are a uniform sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(members[i], members[i + rng.index(members.size() - i)]);
    }
    out.selected.insert(out.selected.end(), members.begin(), members.begin() + take);
    out.labels.push_back(e.label);
    out.quota.push_back(e.count);
    out.take.push_back(take);
    out.budget += take;
    if (head) {
      out.head_quota = e.count;
      out.head_take = take;
    }
  }
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

std::string_view sharding_name(ShardingMode m) { return m == ShardingMode::data ? "data" : "model"; }

ShardingMode parse_sharding(std::string_view text) {
  if (text == "data") return ShardingMode::data;
  if (text == "model") return ShardingMode::model;
  throw ConfigError("unknown sharding mode '" + std::string(text) + "'");
}

std::vector<std::vector<std::size_t>> allocate_queries(std::size_t n_queries, std::size_t K,
                                                       ShardingMode mode, RngStream& rng) {
  if (K == 0) throw ContractError("allocate_queries: K must be positive");
  std::vector<std::vector<std::size_t>> shards(K);
  std::vector<std::size_t> order(n_queries);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == ShardingMode::model) {
    for (auto& s : shards) s = order;
    return shards;
  }
  shuffle(order, rng);
  for (std::size_t i = 0; i < order.size(); ++i) shards[i % K].push_back(order[i]);
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return shards;
}

std::vector<std::vector<std::size_t>> split_rollouts(std::size_t G, std::size_t K,
                                                     RngStream& rng) {
  if (K == 0) throw ContractError("split_rollouts: K must be positive");
  std::vector<std::size_t> order(G);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::vector<std::vector<std::size_t>> parts(K);
  for (std::size_t i = 0; i < G; ++i) parts[i % K].push_back(order[i]);
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

void RlerConfig::validate() const {
  if (K < 1) throw ConfigError("rler: K must be at least 1");
  if (G_k < 1) throw ConfigError("rler: G_k must be at least 1");
  if (alpha_fixed && !(*alpha_fixed >= 0.0 && *alpha_fixed <= 1.0)) {
    throw ConfigError("rler: alpha_fixed must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("rler: learning rate must be positive");
  if (!(temperature > 0.0)) throw ConfigError("rler: temperature must be positive");
  if (total_steps < 1) throw ConfigError("rler: total_steps must be at least 1");
}

StepResult rler_train_step(const EnsembleState& state, std::span<const Question> batch,
                           const RlerConfig& config, std::uint64_t seed, std::int64_t step,
                           std::size_t workers) {
  config.validate();
  if (state.policies.size() != config.K) {
    throw ConfigError("rler: ensemble holds " + std::to_string(state.policies.size()) +
                      " policies but K = " + std::to_string(config.K));
  }
  if (state.rollouts_per_source != config.G_k) {
    throw ConfigError("rler: ensemble and config disagree on G_k");
  }
  const std::size_t n = batch.size();
  StepResult result{state, std::vector<QuestionTrace>(n)};
  auto& traces = result.traces;
  const auto uid = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };

  // Sampling against the incoming snapshot.
  parallel_for(n, workers, [&](std::size_t q) {
    const Question& question = batch[q];
    QuestionTrace& tr = traces[q];
    tr.question_id = question.id;
    tr.truth = question.truth;
    tr.pooled.question_id = question.id;
    tr.pooled.policy_row = question.group;
    for (std::size_t k = 0; k < config.K; ++k) {
      RngStream rng = RngStream::keyed(seed, StreamTag::sample, {uid(step), uid(question.id), k});
      auto drawn = sample_rollouts(state.policies[k], question, config.G_k, k, rng,
                                   config.temperature);
      tr.pooled.rollouts.insert(tr.pooled.rollouts.end(), drawn.begin(), drawn.end());
    }
    tr.sources = summarize_sources(tr.pooled, config.K);
  });

  // Batch-wide bounds: the one synchronization point before estimation.
  std::vector<std::vector<SourceSummary>> all_sources(n);
  for (std::size_t q = 0; q < n; ++q) all_sources[q] = traces[q].sources;
  const std::vector<ConfidenceBounds> bounds =
      n ? batch_confidence_bounds(all_sources) : std::vector<ConfidenceBounds>{};
  const double annealed =
      config.total_steps <= 1
          ? 0.0
          : std::clamp(1.0 - static_cast<double>(step) / static_cast<double>(config.total_steps - 1),
                       0.0, 1.0);

  parallel_for(n, workers, [&](std::size_t q) {
    QuestionTrace& tr = traces[q];
    tr.estimate = unified_alpha(tr.sources, bounds, config.interpolation, annealed);
    const AnswerLabel& m = tr.estimate.m_ec;
    tr.hard = RewardSet{tr.question_id, {}, Estimator::sc, std::nullopt, m};
    tr.soft = RewardSet{tr.question_id, {}, Estimator::freq, std::nullopt, m};
    for (const auto& r : tr.pooled.rollouts) {
      tr.hard.rewards.push_back(r.label == m ? 1.0 : 0.0);
      tr.soft.rewards.push_back(tr.estimate.p_bar[tr.estimate.index_of(r.label)]);
    }
    if (config.alpha_fixed) {
      tr.reward_alpha = *config.alpha_fixed;
    } else if (config.interpolation == InterpolationVariant::off) {
      tr.reward_alpha = 0.0;
    } else {
      tr.reward_alpha = tr.estimate.alpha;
    }
    tr.interp = interpolate_rewards(tr.hard, tr.soft, tr.reward_alpha);
    tr.interp.majority = m;
    if (config.selection) {
      RngStream rng = RngStream::keyed(seed, StreamTag::select, {uid(step), uid(tr.question_id)});
      tr.selection = select_rollouts(tr.pooled, tr.estimate, rng);
    } else {
      tr.selection = select_all(tr.pooled, m);
    }
    for (std::size_t k = 0; k < config.K; ++k) {
      std::vector<AnswerLabel> labels;
      for (std::size_t i : tr.pooled.source_indices(k)) labels.push_back(tr.pooled.rollouts[i].label);
      tr.source_majority.push_back(AnswerHistogram(labels).majority());
    }
  });

  RngStream alloc_rng = RngStream::keyed(seed, StreamTag::allocate, {uid(step)});
  const auto shards = allocate_queries(n, config.K, config.mode, alloc_rng);
  std::vector<std::vector<std::vector<std::size_t>>> splits;
  if (config.mode == ShardingMode::model) {
    splits.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
      RngStream rng =
          RngStream::keyed(seed, StreamTag::allocate, {uid(step), uid(traces[q].question_id)});
      splits[q] = split_rollouts(traces[q].pooled.size(), config.K, rng);
    }
  }

  for (std::size_t k = 0; k < config.K; ++k) {
    std::vector<RolloutGroup> groups;
    std::vector<std::vector<double>> advantages;
    for (std::size_t q : shards[k]) {
      QuestionTrace& tr = traces[q];
      std::vector<std::size_t> use = tr.selection.selected;
      if (config.mode == ShardingMode::model) {
        std::vector<std::size_t> mine;
        std::set_intersection(use.begin(), use.end(), splits[q][k].begin(), splits[q][k].end(),
                              std::back_inserter(mine));
        use = std::move(mine);
      }
      if (use.empty()) continue;  // nothing selected: skip this query
      std::vector<double> adv;
      if (config.advantage_scope == AdvantageScope::selected) {
        adv = standardized_advantages(tr.interp.subset(use).rewards);
      } else {
        const std::vector<double> all = standardized_advantages(tr.interp.rewards);
        if (!all.empty()) {
          for (std::size_t i : use) adv.push_back(all[i]);
        }
      }
      tr.updated_by.push_back(k);
      groups.push_back(tr.pooled.subset(use));
      advantages.push_back(std::move(adv));
    }
    result.state.policies[k] = apply_policy_gradient(state.policies[k], groups, advantages,
                                                     config.learning_rate, config.temperature);
  }
  return result;
}

}  // namespace rler
