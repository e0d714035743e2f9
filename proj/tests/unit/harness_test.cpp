#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rler/config.hpp"
#include "rler/errors.hpp"
#include "rler/harness.hpp"

namespace fs = std::filesystem;
using namespace rler;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.corpus.n_questions = 300;
  c.eval.n_questions = 60;
  c.eval.eval_every = 10;
  c.training.steps = 30;
  c.training.batch_size = 8;
  c.seeds = {1, 2};
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rler_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_EQ(to_ini(parse_config(to_ini(c))), to_ini(c));
}

TEST(Config, EditedValuesRoundTrip) {
  ExperimentConfig c;
  c.estimator = EstimatorChoice::rler;
  c.rler.mode = ShardingMode::model;
  c.rler.interpolation = InterpolationVariant::v2;
  c.rler.alpha_fixed = 0.25;
  c.noise.eps_sym = 0.1;
  c.estimator = EstimatorChoice::oracle;
  c.training.learning_rate = 0.0123;
  c.seeds = {5, 9};
  c.corpus.operators = {Operator::add, Operator::mod};
  const ExperimentConfig back = parse_config(to_ini(c));
  EXPECT_EQ(to_ini(back), to_ini(c));
  EXPECT_EQ(back.seeds, (std::vector<std::uint64_t>{5, 9}));
  EXPECT_EQ(*back.rler.alpha_fixed, 0.25);
}

TEST(Config, UnknownKeysAndBadValuesAreErrors) {
  EXPECT_THROW(parse_config("[training]\nsteps = 10\nspeed = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[training]\nsteps = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("[training\nsteps = 1\n"), ParseError);
}

TEST(Config, PartialFileKeepsDefaults) {
  const ExperimentConfig c = parse_config("# comment\n[training]\nsteps = 7\n");
  EXPECT_EQ(c.training.steps, 7);
  EXPECT_EQ(c.training.G, 16u);
  EXPECT_EQ(c.estimator, EstimatorChoice::sc);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.estimator = EstimatorChoice::sc;
  c.noise.eps_sym = 0.2;
  EXPECT_THROW(c.validate(), ConfigError) << "noise needs oracle base rewards";
  c.estimator = EstimatorChoice::oracle;
  EXPECT_NO_THROW(c.validate());

  ExperimentConfig r;
  r.estimator = EstimatorChoice::rler;
  r.rler.K = 3;
  EXPECT_THROW(r.validate(), ConfigError) << "K * G_k must equal G";
  r.rler.G_k = 16;
  r.rler.K = 1;
  EXPECT_NO_THROW(r.validate());
}

TEST(Config, SetValueByQualifiedAndBareName) {
  ExperimentConfig c;
  set_config_value(c, "noise.eps_fp", "0.4");
  set_config_value(c, "estimator", "freq");
  set_config_value(c, "n_questions", "700");
  set_config_value(c, "eval.n_questions", "70");
  EXPECT_EQ(c.noise.eps_fp, 0.4);
  EXPECT_EQ(c.estimator, EstimatorChoice::freq);
  EXPECT_EQ(c.corpus.n_questions, 700u);
  EXPECT_EQ(c.eval.n_questions, 70u);
  EXPECT_THROW(set_config_value(c, "noise.nothing", "1"), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& e : fs::directory_iterator(RLER_CONFIG_DIR)) {
    EXPECT_NO_THROW(load_config(e.path()).validate()) << e.path();
  }
}

TEST(Harness, OracleWithoutNoiseHasZeroNoise) {
  ExperimentConfig c = small_config();
  c.estimator = EstimatorChoice::oracle;
  const SeedResult r = run_seed(c, 1);
  ASSERT_EQ(r.rows.size(), 30u);
  for (const auto& row : r.rows) EXPECT_EQ(row.rho_noise, 0.0);
}

TEST(Harness, ScIsFullySelfConsistent) {
  const SeedResult r = run_seed(small_config(), 2);
  for (const auto& row : r.rows) EXPECT_EQ(row.rho_selfbias, 1.0);
}

TEST(Harness, EvaluationCadence) {
  const SeedResult r = run_seed(small_config(), 1);
  for (const auto& row : r.rows) {
    const bool evaluated = (row.step + 1) % 10 == 0 || row.step == 29;
    EXPECT_EQ(std::isfinite(row.avg_at_k), evaluated) << "step " << row.step;
    EXPECT_TRUE(std::isfinite(row.greedy_acc));
  }
}

TEST(Harness, RerunIsByteIdentical) {
  ExperimentConfig c = small_config();
  c.estimator = EstimatorChoice::rler;
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  run_experiment(c, a, 1);
  run_experiment(c, b, 3);
  for (const char* f : {"metrics.csv", "selection.csv", "config.ini", "deployable.ckpt"}) {
    EXPECT_EQ(slurp(a / "seed_1" / f), slurp(b / "seed_1" / f)) << f;
  }
  EXPECT_EQ(slurp(a / "seed_1" / "metrics.csv").substr(0, std::string(kMetricsHeader).size()),
            kMetricsHeader);
}

TEST(Harness, RlerDeployableIsMergedAndMembersDiffer) {
  ExperimentConfig c = small_config();
  c.estimator = EstimatorChoice::rler;
  c.rler.init_jitter = 0.1;
  const SeedResult r = run_seed(c, 3);
  ASSERT_EQ(r.policies.size(), 2u);
  EXPECT_NE(r.policies[0].logits, r.policies[1].logits);
  EXPECT_EQ(r.member_at_k.size(), 2u);
  EXPECT_EQ(r.deployable.n_groups, 15u);
}

TEST(Sweep, OneRunPerValueAndSeedSortedNumerically) {
  ExperimentConfig c = small_config();
  c.estimator = EstimatorChoice::oracle;
  c.training.steps = 5;
  const fs::path dir = scratch("sweep");
  const auto rows = sweep(c, "eps_sym", {"0.4", "0", "0.2"}, dir, 2);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows.front().value, "0");
  EXPECT_EQ(rows.back().value, "0.4");
  for (const char* v : {"0", "0.2", "0.4"}) {
    for (const char* s : {"seed_1", "seed_2"}) {
      EXPECT_TRUE(fs::exists(dir / ("eps_sym=" + std::string(v)) / s / "metrics.csv"));
    }
  }
  std::ifstream in(dir / "summary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("value,seed,final_greedy_acc", 0), 0u);
  EXPECT_EQ(report(dir).filename(), "pivot.csv");
}

TEST(Sweep, EstimatorAxisPairsSeeds) {
  ExperimentConfig c = small_config();
  c.training.steps = 5;
  const auto rows = sweep(c, "estimator", {"sc", "freq", "rler"}, scratch("estimators"), 2);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].value, "freq");  // lexical order for non-numeric values
  EXPECT_EQ(rows[0].seed, rows[2].seed);
}

TEST(Sweep, InvalidValueFailsBeforeRunning) {
  const fs::path dir = scratch("invalid");
  EXPECT_THROW(sweep(small_config(), "eps_sym", {"0.1", "7"}, dir, 1), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "eps_sym=0.1"));
  EXPECT_THROW(sweep(small_config(), "no_such_key", {"1"}, dir, 1), ConfigError);
}

TEST(Report, CurvesForARunDirectory) {
  const fs::path dir = scratch("curves");
  ExperimentConfig c = small_config();
  c.training.steps = 4;
  run_experiment(c, dir, 2);
  const fs::path out = report(dir);
  EXPECT_EQ(out.filename(), "curves.csv");
  std::ifstream in(out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 5u);
}

TEST(Format, NonFiniteValues) {
  EXPECT_EQ(format_metric(std::nan("")), "nan");
  EXPECT_EQ(format_metric(INFINITY), "inf");
  EXPECT_EQ(format_metric(0.1), "0.1");
}
