#include "rler/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "rler/ensemble.hpp"
#include "rler/errors.hpp"
#include "rler/merge.hpp"
#include "rler/noise_forge.hpp"
#include "rler/parallel.hpp"
#include "rler/rewards.hpp"

namespace rler {

const char* const kMetricsHeader =
    "step,rho_noise,rho_selfbias,rho_selfbias_true,rho_selfbias_err,fn,fp,br_ir,rho_symbias,"
    "avg_at_k,pass_at_k,maj_at_k,interp_gain,diversity_gain,greedy_acc";

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t uid(std::int64_t v) { return static_cast<std::uint64_t>(v); }

struct QuestionOutcome {
  QuestionBias bias;
  double interp_gain = 0.0;
  bool used = false;
};

std::vector<std::size_t> draw_batch(std::size_t n, std::size_t size, std::uint64_t seed,
                                    std::int64_t step) {
  RngStream rng = RngStream::keyed(seed, StreamTag::batch, {uid(step)});
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(size);
  return idx;
}

AtK evaluate_at_k(const PolicyParams& policy, const std::vector<Question>& eval_set,
                  std::size_t k, double temperature, std::uint64_t seed, std::int64_t step,
                  std::size_t member) {
  AtK total;
  for (const auto& q : eval_set) {
    RngStream rng = RngStream::keyed(seed, StreamTag::eval, {uid(step), uid(q.id), member});
    const auto rollouts = sample_rollouts(policy, q, k, 0, rng, temperature);
    std::vector<AnswerLabel> labels;
    labels.reserve(k);
    for (const auto& r : rollouts) labels.push_back(r.label);
    const AtK one = eval_at_k(labels, q.truth);
    total.avg += one.avg;
    total.pass += one.pass;
    total.maj += one.maj;
  }
  const double n = static_cast<double>(eval_set.size());
  return AtK{total.avg / n, total.pass / n, total.maj / n};
}

double opt_or_nan(const std::optional<double>& v) { return v ? *v : kNaN; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string metrics_csv(const std::vector<StepMetrics>& rows) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.step;
    for (double v : {r.rho_noise, r.rho_selfbias, r.rho_selfbias_true, r.rho_selfbias_err, r.fn,
                     r.fp, r.br_ir, r.rho_symbias, r.avg_at_k, r.pass_at_k, r.maj_at_k,
                     r.interp_gain, r.diversity_gain, r.greedy_acc}) {
      out << ',' << format_metric(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string selection_csv(const std::vector<SelectionStep>& rows) {
  std::ostringstream out;
  out << "step,wrong_questions,noise_selected,noise_all,right_questions,head_take_right,"
         "head_take_wrong\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.wrong_questions << ',' << format_metric(r.noise_selected) << ','
        << format_metric(r.noise_all) << ',' << r.right_questions << ','
        << format_metric(r.head_take_right) << ',' << format_metric(r.head_take_wrong) << '\n';
  }
  return out.str();
}

double mean_abs_gap(const std::vector<double>& a, const std::vector<double>& b,
                    const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(idx.size());
}

}  // namespace

std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t policy_hash(const std::vector<PolicyParams>& policies) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : policies) {
    feed(&p.step_count, sizeof p.step_count);
    feed(p.logits.data(), p.logits.size() * sizeof(double));
  }
  return h;
}

double SeedResult::column_mean(double StepMetrics::*column) const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    const double v = r.*column;
    if (std::isfinite(v)) {
      s += v;
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : kNaN;
}

double SeedResult::greedy_accuracy_between(const PolicyInit& init, double lo, double hi) const {
  double correct = 0.0, total = 0.0;
  for (std::size_t g = 0; g < group_greedy.size(); ++g) {
    const double p = initial_correct_probability(group_greedy.size(), g, init);
    if (p < lo - 1e-12 || p > hi + 1e-12) continue;
    correct += group_greedy[g] * static_cast<double>(group_sizes[g]);
    total += static_cast<double>(group_sizes[g]);
  }
  return total > 0.0 ? correct / total : kNaN;
}

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& out_dir, std::size_t workers) {
  config.validate();
  const std::vector<Question> corpus = gen_dataset(config.corpus);
  CorpusConfig eval_corpus = config.corpus;
  eval_corpus.n_questions = config.eval.n_questions;
  eval_corpus.seed = config.eval.seed;
  const std::vector<Question> eval_set = gen_dataset(eval_corpus);

  const std::size_t n_groups = config.corpus.n_groups;
  const std::size_t L = config.corpus.candidates;
  const bool is_rler = config.estimator == EstimatorChoice::rler;
  const std::size_t K = is_rler ? config.rler.K : 1;
  const double tau = config.training.temperature;

  SeedResult result;
  result.seed = seed;
  result.group_sizes.assign(n_groups, 0);
  for (const auto& q : corpus) ++result.group_sizes[q.group];

  const PolicyParams base = init_policy(n_groups, L, config.policy);
  EnsembleState state;
  state.mode = config.rler.mode;
  state.rollouts_per_source = is_rler ? config.rler.G_k : config.training.G;
  for (std::size_t k = 0; k < K; ++k) {
    PolicyParams p = base;
    if (is_rler && config.rler.init_jitter > 0.0) {
      RngStream rng = RngStream::keyed(seed, StreamTag::init, {k});
      for (double& v : p.logits) v += config.rler.init_jitter * rng.normal();
    }
    state.policies.push_back(std::move(p));
  }

  RlerConfig rc;
  rc.K = config.rler.K;
  rc.G_k = config.rler.G_k;
  rc.mode = config.rler.mode;
  rc.interpolation = config.rler.interpolation;
  rc.selection = config.rler.selection;
  rc.alpha_fixed = config.rler.alpha_fixed;
  rc.advantage_scope = config.rler.advantage_scope;
  rc.learning_rate = config.training.learning_rate;
  rc.temperature = tau;
  rc.total_steps = config.training.steps;

  const MergeConfig merge_config{0.7, 0.5, base};
  auto deployable = [&](const std::vector<PolicyParams>& policies) {
    return policies.size() == 1 ? policies.front() : ties_merge(policies, merge_config);
  };
  auto greedy_of = [&](const PolicyParams& p) {
    double correct = 0.0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (p.greedy_slot(g) == 0) correct += static_cast<double>(result.group_sizes[g]);
    }
    return correct / static_cast<double>(corpus.size());
  };

  const std::size_t B = config.training.batch_size;
  for (std::int64_t step = 0; step < config.training.steps; ++step) {
    const std::vector<std::size_t> picks = draw_batch(corpus.size(), B, seed, step);
    std::vector<Question> batch;
    batch.reserve(B);
    for (std::size_t i : picks) batch.push_back(corpus[i]);

    std::vector<QuestionOutcome> outcomes(B);
    std::vector<bool> ensemble_correct(B);
    std::vector<std::vector<bool>> source_correct(K, std::vector<bool>(B));

    if (is_rler) {
      StepResult sr = rler_train_step(state, batch, rc, seed, step, workers);
      SelectionStep sel;
      sel.step = step;
      double head_right = 0.0, head_wrong = 0.0;
      std::size_t wrong_all = 0;
      for (std::size_t q = 0; q < B; ++q) {
        const QuestionTrace& tr = sr.traces[q];
        const bool right = tr.estimate.m_ec == tr.truth;
        ensemble_correct[q] = right;
        for (std::size_t k = 0; k < K; ++k) source_correct[k][q] = tr.source_majority[k] == tr.truth;
        const RewardSet star_all = oracle_rewards(tr.pooled, tr.truth);
        if (right) {
          ++sel.right_questions;
          head_right += static_cast<double>(tr.selection.head_take);
        } else {
          ++wrong_all;
          head_wrong += static_cast<double>(tr.selection.head_take);
          if (!tr.selection.selected.empty()) {
            std::vector<std::size_t> all(tr.pooled.size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            ++sel.wrong_questions;
            sel.noise_selected +=
                mean_abs_gap(tr.interp.rewards, star_all.rewards, tr.selection.selected);
            sel.noise_all += mean_abs_gap(tr.interp.rewards, star_all.rewards, all);
          }
        }
        const auto& use = tr.selection.selected;
        if (use.empty()) continue;
        const RewardSet r = tr.interp.subset(use);
        const RewardSet star = star_all.subset(use);
        const RewardSet hard = tr.hard.subset(use);
        RewardSet tilde;
        switch (config.self_estimate) {
          case SelfEstimate::own: tilde = r; break;
          case SelfEstimate::sc: tilde = hard; break;
          case SelfEstimate::automatic: {
            tilde = RewardSet{tr.question_id, {}, Estimator::sc, std::nullopt, std::nullopt};
            for (std::size_t i : use) {
              const Rollout& ro = tr.pooled.rollouts[i];
              tilde.rewards.push_back(ro.label == tr.source_majority[ro.source] ? 1.0 : 0.0);
            }
            break;
          }
        }
        outcomes[q].bias = assess_question(r, star, tilde, right);
        outcomes[q].interp_gain = interpolation_gain(hard, r, star);
        outcomes[q].used = true;
      }
      if (sel.wrong_questions) {
        sel.noise_selected /= static_cast<double>(sel.wrong_questions);
        sel.noise_all /= static_cast<double>(sel.wrong_questions);
      } else {
        sel.noise_selected = sel.noise_all = kNaN;
      }
      sel.head_take_right = sel.right_questions ? head_right / sel.right_questions : kNaN;
      sel.head_take_wrong = wrong_all ? head_wrong / static_cast<double>(wrong_all) : kNaN;
      result.selection.push_back(sel);
      state = std::move(sr.state);
    } else {
      const std::size_t G = config.training.G;
      std::vector<RolloutGroup> groups(B);
      std::vector<RewardSet> rewards(B);
      parallel_for(B, workers, [&](std::size_t q) {
        const Question& question = batch[q];
        RngStream rng = RngStream::keyed(seed, StreamTag::sample, {uid(step), uid(question.id), 0});
        groups[q] = RolloutGroup{question.id, question.group,
                                 sample_rollouts(state.policies[0], question, G, 0, rng, tau)};
        const RewardSet star = oracle_rewards(groups[q], question.truth);
        const RewardSet sc = sc_rewards(groups[q]);
        RewardSet r;
        switch (config.estimator) {
          case EstimatorChoice::oracle:
            if (config.noise.is_zero()) {
              r = star;
            } else {
              RngStream nrng =
                  RngStream::keyed(seed, StreamTag::noise, {uid(step), uid(question.id)});
              r = forge_rewards(star, sc, config.noise, nrng);
            }
            break;
          case EstimatorChoice::sc: r = sc; break;
          case EstimatorChoice::freq: r = freq_rewards(groups[q]); break;
          case EstimatorChoice::judge: {
            RngStream jrng = RngStream::keyed(seed, StreamTag::judge, {uid(step), uid(question.id)});
            r = judge_rewards(groups[q], question.truth, config.judge.acc_correct,
                              config.judge.acc_incorrect, jrng);
            break;
          }
          case EstimatorChoice::rler: break;
        }
        const bool own = config.self_estimate == SelfEstimate::own ||
                         (config.self_estimate == SelfEstimate::automatic &&
                          (config.estimator == EstimatorChoice::sc ||
                           config.estimator == EstimatorChoice::freq));
        const bool right = *sc.majority == question.truth;
        ensemble_correct[q] = right;
        source_correct[0][q] = right;
        outcomes[q].bias = assess_question(r, star, own ? r : sc, right);
        outcomes[q].interp_gain = interpolation_gain(sc, r, star);
        outcomes[q].used = true;
        rewards[q] = std::move(r);
      });
      state.policies[0] = grpo_update(state.policies[0], groups, rewards,
                                      config.training.learning_rate, tau);
    }
    result.trajectory.push_back(policy_hash(state.policies));

    std::vector<QuestionBias> used;
    double gain = 0.0;
    for (const auto& o : outcomes) {
      if (!o.used) continue;
      used.push_back(o.bias);
      gain += o.interp_gain;
    }
    StepMetrics row;
    row.step = step;
    if (used.empty()) {
      row.rho_noise = row.rho_selfbias = row.fn = row.fp = row.interp_gain = kNaN;
      row.rho_selfbias_true = row.rho_selfbias_err = row.br_ir = row.rho_symbias = kNaN;
    } else {
      const BiasReport rep = aggregate_bias(used);
      row.rho_noise = rep.rho_noise;
      row.rho_selfbias = rep.rho_selfbias;
      row.rho_selfbias_true = opt_or_nan(rep.rho_selfbias_true);
      row.rho_selfbias_err = opt_or_nan(rep.rho_selfbias_err);
      row.fn = rep.fn;
      row.fp = rep.fp;
      row.br_ir = rep.br_ir ? *rep.br_ir
                            : (rep.br_ir_infinite ? std::numeric_limits<double>::infinity() : kNaN);
      row.rho_symbias = opt_or_nan(rep.rho_symbias);
      row.interp_gain = gain / static_cast<double>(used.size());
    }
    row.diversity_gain = diversity_gain(ensemble_correct, source_correct);

    const PolicyParams deploy = deployable(state.policies);
    row.greedy_acc = greedy_of(deploy);
    const bool last = step + 1 == config.training.steps;
    if (last || (step + 1) % config.eval.eval_every == 0) {
      const AtK at = evaluate_at_k(deploy, eval_set, config.eval.k, tau, seed, step, 0);
      row.avg_at_k = at.avg;
      row.pass_at_k = at.pass;
      row.maj_at_k = at.maj;
    } else {
      row.avg_at_k = row.pass_at_k = row.maj_at_k = kNaN;
    }
    result.rows.push_back(row);
  }

  result.policies = state.policies;
  result.deployable = deployable(state.policies);
  result.group_greedy.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    result.group_greedy[g] = result.deployable.greedy_slot(g) == 0 ? 1.0 : 0.0;
  }
  const std::int64_t last_step = config.training.steps - 1;
  for (std::size_t k = 0; k < K; ++k) {
    result.member_at_k.push_back(K == 1 ? AtK{result.rows.back().avg_at_k,
                                              result.rows.back().pass_at_k,
                                              result.rows.back().maj_at_k}
                                        : evaluate_at_k(state.policies[k], eval_set,
                                                        config.eval.k, tau, seed, last_step, k + 1));
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    ExperimentConfig resolved = config;
    resolved.seeds = {seed};
    write_text(*out_dir / "config.ini", to_ini(resolved));
    write_text(*out_dir / "metrics.csv", metrics_csv(result.rows));
    if (is_rler) write_text(*out_dir / "selection.csv", selection_csv(result.selection));
    for (std::size_t k = 0; k < K; ++k) {
      write_checkpoint(*out_dir / ("policy_" + std::to_string(k) + ".ckpt"), state.policies[k]);
    }
    write_checkpoint(*out_dir / "deployable.ckpt", result.deployable);
    if (K > 1) write_checkpoint(*out_dir / "base.ckpt", base);
  }
  return result;
}

std::vector<SeedResult> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path& out_dir, std::size_t workers) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.ini", to_ini(config));
  std::vector<SeedResult> results(config.seeds.size());
  const std::size_t inner = config.seeds.size() == 1 ? workers : 1;
  parallel_for(config.seeds.size(), workers, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    results[i] = run_seed(config, seed, out_dir / ("seed_" + std::to_string(seed)), inner);
  });
  return results;
}

SummaryRow summarize(const std::string& value, const SeedResult& result) {
  SummaryRow row;
  row.value = value;
  row.seed = result.seed;
  const StepMetrics& last = result.final_row();
  row.final_greedy_acc = last.greedy_acc;
  row.mean_rho_noise = result.column_mean(&StepMetrics::rho_noise);
  row.mean_rho_selfbias = result.column_mean(&StepMetrics::rho_selfbias);
  row.mean_fn = result.column_mean(&StepMetrics::fn);
  row.mean_fp = result.column_mean(&StepMetrics::fp);
  row.mean_rho_symbias = result.column_mean(&StepMetrics::rho_symbias);
  row.avg_at_k = last.avg_at_k;
  row.pass_at_k = last.pass_at_k;
  row.maj_at_k = last.maj_at_k;
  return row;
}

namespace {

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string path_safe(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return s;
}

const char* const kSummaryHeader =
    "value,seed,final_greedy_acc,mean_rho_noise,mean_rho_selfbias,mean_fn,mean_fp,"
    "mean_rho_symbias,avg_at_k,pass_at_k,maj_at_k";

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) {
        throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " columns in '" +
                                      path.string() + "'");
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ParseError(1, "empty table '" + path.string() + "'");
  return t;
}

double cell_value(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::strtod(s.c_str(), nullptr);
}

struct MeanAccumulator {
  std::vector<double> sum;
  std::vector<std::size_t> count;
  explicit MeanAccumulator(std::size_t n) : sum(n, 0.0), count(n, 0) {}
  void add(std::size_t i, double v) {
    if (std::isnan(v)) return;
    sum[i] += v;
    ++count[i];
  }
  double mean(std::size_t i) const {
    return count[i] ? sum[i] / static_cast<double>(count[i]) : kNaN;
  }
};

}  // namespace

std::vector<SummaryRow> sweep(const ExperimentConfig& base, const std::string& axis,
                              const std::vector<std::string>& values,
                              const std::filesystem::path& out_dir, std::size_t workers) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    set_config_value(c, axis, v);
    c.validate();
    configs.push_back(std::move(c));
  }

  struct Job {
    std::size_t value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (auto s : configs[i].seeds) jobs.push_back({i, s});
  }
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto dir = out_dir / (path_safe(axis + "=" + values[i]));
    std::filesystem::create_directories(dir);
    write_text(dir / "config.ini", to_ini(configs[i]));
  }

  std::vector<SummaryRow> rows(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const auto dir = out_dir / path_safe(axis + "=" + values[job.value]) /
                     ("seed_" + std::to_string(job.seed));
    const SeedResult r = run_seed(configs[job.value], job.seed, dir, 1);
    rows[j] = summarize(values[job.value], r);
  });

  bool numeric = true;
  for (const auto& v : values) numeric = numeric && as_number(v).has_value();
  std::stable_sort(rows.begin(), rows.end(), [&](const SummaryRow& a, const SummaryRow& b) {
    if (numeric) {
      const double x = *as_number(a.value), y = *as_number(b.value);
      if (x != y) return x < y;
    } else if (a.value != b.value) {
      return a.value < b.value;
    }
    return a.seed < b.seed;
  });

  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.value << ',' << r.seed;
    for (double v : {r.final_greedy_acc, r.mean_rho_noise, r.mean_rho_selfbias, r.mean_fn, r.mean_fp,
                     r.mean_rho_symbias, r.avg_at_k, r.pass_at_k, r.maj_at_k}) {
      out << ',' << format_metric(v);
    }
    out << '\n';
  }
  write_text(out_dir / "summary.csv", out.str());
  return rows;
}

std::filesystem::path report(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path summary = dir / "summary.csv";
  if (fs::exists(summary)) {
    const Table t = read_table(summary);

    std::vector<std::string> order;
    std::map<std::string, MeanAccumulator> acc;
    std::map<std::string, std::size_t> seeds;
    const std::size_t cols = t.header.size();
    for (const auto& row : t.rows) {
      if (!acc.count(row[0])) {
        order.push_back(row[0]);
        acc.emplace(row[0], MeanAccumulator(cols));
      }
      ++seeds[row[0]];
      for (std::size_t c = 2; c < cols; ++c) acc.at(row[0]).add(c, cell_value(row[c]));
    }
    std::ostringstream out;
    out << "value,n_seeds";
    for (std::size_t c = 2; c < cols; ++c) out << ',' << t.header[c];
    out << '\n';
    for (const auto& v : order) {
      out << v << ',' << seeds[v];
      for (std::size_t c = 2; c < cols; ++c) out << ',' << format_metric(acc.at(v).mean(c));
      out << '\n';
    }
    const fs::path target = dir / "pivot.csv";
    write_text(target, out.str());
    return target;
  }

  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv")) {
      runs.push_back(entry.path() / "metrics.csv");
    }
  }
  if (fs::exists(dir / "metrics.csv")) runs.push_back(dir / "metrics.csv");
  if (runs.empty()) {
    throw std::runtime_error("'" + dir.string() + "' holds neither summary.csv nor metrics.csv");
  }
  std::sort(runs.begin(), runs.end());

  std::vector<Table> tables;
  for (const auto& p : runs) tables.push_back(read_table(p));
  const std::size_t cols = tables.front().header.size();
  std::size_t n_rows = 0;
  for (const auto& t : tables) {
    if (t.header != tables.front().header) throw ParseError("metrics headers differ across seeds");
    n_rows = std::max(n_rows, t.rows.size());
  }
  std::ostringstream out;
  out << "n_seeds";
  for (const auto& h : tables.front().header) out << ',' << h;
  out << '\n';
  for (std::size_t r = 0; r < n_rows; ++r) {
    MeanAccumulator acc(cols);
    std::size_t present = 0;
    std::string step;
    for (const auto& t : tables) {
      if (r >= t.rows.size()) continue;
      ++present;
      step = t.rows[r][0];
      for (std::size_t c = 1; c < cols; ++c) acc.add(c, cell_value(t.rows[r][c]));
    }
    out << present << ',' << step;
    for (std::size_t c = 1; c < cols; ++c) out << ',' << format_metric(acc.mean(c));
    out << '\n';
  }
  const fs::path target = dir / "curves.csv";
  write_text(target, out.str());
  return target;
}

}  // namespace rler
