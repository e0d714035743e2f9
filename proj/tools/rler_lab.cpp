// Command-line front end: dataset generation, training runs, sweeps, the
// theorem grid check, checkpoint merging and report pivots.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rler/config.hpp"
#include "rler/corpus.hpp"
#include "rler/errors.hpp"
#include "rler/harness.hpp"
#include "rler/merge.hpp"
#include "rler/parallel.hpp"
#include "rler/theorem.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void ensure_parent(const std::string& file) {
  const auto parent = std::filesystem::path(file).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void print_summary(const rler::SeedResult& r) {
  const auto& last = r.final_row();
  std::cout << "seed " << r.seed << ": greedy_acc=" << rler::format_metric(last.greedy_acc)
            << " avg@k=" << rler::format_metric(last.avg_at_k)
            << " pass@k=" << rler::format_metric(last.pass_at_k)
            << " maj@k=" << rler::format_metric(last.maj_at_k)
            << " mean_rho_noise=" << rler::format_metric(r.column_mean(&rler::StepMetrics::rho_noise))
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-rewarding RL laboratory"};
  app.require_subcommand(1);
  std::size_t workers = rler::default_worker_count();
  app.add_option("--workers", workers, "Worker threads (default: RLER_WORKERS or all cores)");

  std::string config_path, out_path;

  auto* gen = app.add_subcommand("gen-data", "Generate the arithmetic corpus as JSONL");
  gen->add_option("--config", config_path, "Experiment config")->required();
  gen->add_option("--out", out_path, "Output JSONL file")->required();

  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "Train every configured seed (or one)");
  train->add_option("--config", config_path, "Experiment config")->required();
  train->add_option("--seed", seed, "Run only this seed");
  train->add_option("--out", out_path, "Run directory")->default_val("runs/train");

  std::string axis, values;
  auto* sw = app.add_subcommand("sweep", "One run per (value, seed) along a config key");
  sw->add_option("--config", config_path, "Base experiment config")->required();
  sw->add_option("--axis", axis, "Config key, e.g. noise.eps_sym")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--out", out_path, "Sweep directory")->default_val("runs/sweep");

  std::size_t labels = 3;
  double step = 0.05;
  std::string csv_path;
  auto* thm = app.add_subcommand("verify-theorem", "Exhaustive hard-vs-soft reward grid check");
  thm->add_option("--L", labels, "Number of labels (3, 4 or 5)")->default_val(3);
  thm->add_option("--step", step, "Grid spacing; must divide 1")->default_val(0.05);
  thm->add_option("--csv", csv_path, "CSV output")->default_val("theorem_grid.csv");

  std::string checkpoints, base_path;
  double trim = 0.7, scale = 0.5;
  auto* mg = app.add_subcommand("merge", "Ties-merge policy checkpoints");
  mg->add_option("--checkpoints", checkpoints, "Comma-separated checkpoint files")->required();
  mg->add_option("--config", config_path, "Config whose policy init is the merge base");
  mg->add_option("--base", base_path, "Base checkpoint (overrides --config)");
  mg->add_option("--trim", trim, "Kept fraction of each task vector")->default_val(0.7);
  mg->add_option("--scale", scale, "Scale of the merged task vector")->default_val(0.5);
  mg->add_option("--out", out_path, "Output checkpoint")->required();

  std::string run_dir;
  auto* rep = app.add_subcommand("report", "Write plot-ready pivots of a run or sweep");
  rep->add_option("--run", run_dir, "Run or sweep directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto config = rler::load_config(config_path);
      const auto data = rler::gen_dataset(config.corpus);
      ensure_parent(out_path);
      rler::write_dataset(out_path, data);
      std::cout << "wrote " << data.size() << " questions to " << out_path << '\n';
    } else if (*train) {
      auto config = rler::load_config(config_path);
      if (seed) config.seeds = {*seed};
      const auto results = rler::run_experiment(config, out_path, workers);
      for (const auto& r : results) print_summary(r);
      std::cout << "run directory: " << out_path << '\n';
    } else if (*sw) {
      const auto config = rler::load_config(config_path);
      const auto rows = rler::sweep(config, axis, split_commas(values), out_path, workers);
      for (const auto& r : rows) {
        std::cout << axis << '=' << r.value << " seed " << r.seed
                  << ": greedy_acc=" << rler::format_metric(r.final_greedy_acc)
                  << " mean_rho_noise=" << rler::format_metric(r.mean_rho_noise) << '\n';
      }
      std::cout << "summary: " << (std::filesystem::path(out_path) / "summary.csv").string() << '\n';
    } else if (*thm) {
      const auto report = rler::verify_theorem_grid(labels, step);
      ensure_parent(csv_path);
      rler::write_theorem_csv(csv_path, report);
      std::cout << "grid points: " << report.points.size()
                << "  sufficiency checked: " << report.sufficiency_checked
                << "  necessity checked: " << report.necessity_checked
                << "  dispersion pairs: " << report.dispersion_pairs_checked << '\n'
                << "skipped (tied majority): " << report.skipped_ties
                << "  skipped (undefined): " << report.skipped_undefined
                << "  max closed-form gap: " << report.max_closed_form_gap << '\n';
      for (const auto& v : report.violations) {
        std::cout << "VIOLATION [" << v.check << "] " << v.detail << '\n';
      }
      std::cout << report.violations.size() << " violation(s); csv: " << csv_path << '\n';
      return report.violations.empty() ? 0 : 1;
    } else if (*mg) {
      std::vector<rler::PolicyParams> policies;
      for (const auto& p : split_commas(checkpoints)) policies.push_back(rler::read_checkpoint(p));
      if (policies.empty()) throw rler::ConfigError("merge: no checkpoints given");
      rler::MergeConfig mc;
      mc.trim_fraction = trim;
      mc.scale = scale;
      if (!base_path.empty()) {
        mc.base = rler::read_checkpoint(base_path);
      } else if (!config_path.empty()) {
        const auto config = rler::load_config(config_path);
        mc.base = rler::init_policy(config.corpus.n_groups, config.corpus.candidates, config.policy);
      } else {
        throw rler::ConfigError("merge: give --base or --config to define the merge base");
      }
      ensure_parent(out_path);
      rler::write_checkpoint(out_path, rler::ties_merge(policies, mc));
      std::cout << "merged " << policies.size() << " checkpoints into " << out_path << '\n';
    } else if (*rep) {
      std::cout << rler::report(run_dir).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
