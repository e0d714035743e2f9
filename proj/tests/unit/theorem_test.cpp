#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rler/errors.hpp"
#include "rler/theorem.hpp"

using namespace rler;

namespace {

// Pearson correlation of r with 1[label == t] over the outcome distribution q,
// written out directly from the definitions.
double pearson_over_outcomes(const std::vector<double>& q, std::size_t t,
                             const std::vector<double>& r) {
  double er = 0, es = 0, ers = 0, err = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double s = j == t ? 1.0 : 0.0;
    er += q[j] * r[j];
    es += q[j] * s;
    ers += q[j] * r[j] * s;
    err += q[j] * r[j] * r[j];
  }
  return (ers - er * es) / std::sqrt((err - er * er) * (es - es * es));
}

double hard_oracle(const std::vector<double>& q, std::size_t t) {
  const std::size_t m = static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
  std::vector<double> r(q.size(), 0.0);
  r[m] = 1.0;
  return pearson_over_outcomes(q, t, r);
}

double soft_oracle(const std::vector<double>& q, std::size_t t) {
  return pearson_over_outcomes(q, t, q);
}

}  // namespace

TEST(Correlations, FirstExample) {
  const LabelDistribution d{{0.5, 0.3, 0.2}, 1};
  const Correlations c = closed_form_correlations(d);
  EXPECT_NEAR(c.rho_hard, -0.6547, 1e-4);
  EXPECT_NEAR(c.rho_soft, -0.4193, 1e-4);
  EXPECT_NEAR(c.rho_hard, hard_oracle(d.q, 1), 1e-12);
  EXPECT_NEAR(c.rho_soft, soft_oracle(d.q, 1), 1e-12);
  EXPECT_NEAR(enumerated_correlation(d, RewardKind::soft), c.rho_soft, 1e-12);
}

TEST(Correlations, SecondExample) {
  const LabelDistribution d{{0.6, 0.1, 0.3}, 1};
  const Correlations c = closed_form_correlations(d);
  EXPECT_NEAR(c.rho_hard, -0.4082, 1e-4);
  EXPECT_NEAR(c.rho_soft, -0.6667, 1e-4);
  EXPECT_NEAR(c.rho_hard, hard_oracle(d.q, 1), 1e-12);
  EXPECT_NEAR(c.rho_soft, soft_oracle(d.q, 1), 1e-12);
}

TEST(Correlations, UniformIsUndefined) {
  EXPECT_THROW(closed_form_correlations({{0.2, 0.2, 0.2, 0.2, 0.2}, 0}), UndefinedCorrelation);
  EXPECT_THROW(enumerated_correlation({{0.25, 0.25, 0.25, 0.25}, 2}, RewardKind::soft),
               UndefinedCorrelation);
}

TEST(Correlations, AffineInvariance) {
  const LabelDistribution d{{0.45, 0.15, 0.25, 0.15}, 2};
  for (RewardKind k : {RewardKind::hard, RewardKind::soft}) {
    EXPECT_NEAR(enumerated_correlation(d, k, 3.0, -1.5), enumerated_correlation(d, k), 1e-12);
    EXPECT_NEAR(enumerated_mse(d, k, 0.2, 4.0), enumerated_mse(d, k), 1e-12);
  }
}

TEST(Mse, HardRewardMatchingTheOracle) {
  const MseResult r = exact_estimator_mse({{0.2, 0.5, 0.3}, 1}, RewardKind::hard);
  EXPECT_EQ(r.rho, 1.0);
  EXPECT_NEAR(r.enumerated, 0.0, 1e-12);
}

TEST(Mse, SoftBetterWhenTruthDominatesTail) {
  const LabelDistribution d{{0.5, 0.3, 0.2}, 1};
  const MseResult h = exact_estimator_mse(d, RewardKind::hard);
  const MseResult s = exact_estimator_mse(d, RewardKind::soft);
  EXPECT_NEAR(h.enumerated, 2.0 * (1.0 - hard_oracle(d.q, 1)), 1e-12);
  EXPECT_NEAR(h.enumerated, 3.3094, 1e-4);
  EXPECT_NEAR(s.enumerated, 2.0 * (1.0 - soft_oracle(d.q, 1)), 1e-12);
  EXPECT_NEAR(s.enumerated, 2.8386, 1e-4);
  EXPECT_LT(s.enumerated, h.enumerated);
}

TEST(Mse, HardBetterWhenTailOutweighsTruth) {
  const LabelDistribution d{{0.6, 0.1, 0.3}, 1};
  EXPECT_GT(exact_estimator_mse(d, RewardKind::soft).enumerated,
            exact_estimator_mse(d, RewardKind::hard).enumerated);
}

TEST(Empirical, LargeGroupsApproachTheClosedForm) {
  const LabelDistribution d{{0.5, 0.3, 0.2}, 1};
  RngStream rng(12);
  const Correlations c = empirical_correlations(d, 20000, rng);
  const Correlations exact = closed_form_correlations(d);
  EXPECT_NEAR(c.rho_hard, exact.rho_hard, 0.03);
  EXPECT_NEAR(c.rho_soft, exact.rho_soft, 0.03);
}

TEST(Distribution, TiedMajorityIsAContractError) {
  EXPECT_THROW(LabelDistribution({{0.4, 0.4, 0.2}, 2}).majority(), ContractError);
}

TEST(Grid, ThreeLabelsHaveNoViolations) {
  const TheoremReport r = verify_theorem_grid(3, 0.05);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_LE(r.max_closed_form_gap, 1e-9);
  EXPECT_GT(r.sufficiency_checked, 0u);
  EXPECT_GT(r.necessity_checked, 0u);
}

TEST(Grid, WitnessAndBoundaryPoints) {
  const TheoremReport r = verify_theorem_grid(3, 0.05);
  bool witness = false, boundary = false;
  for (const auto& p : r.points) {
    if (std::abs(p.a - 0.1) < 1e-12 && std::abs(p.b - 0.6) < 1e-12 &&
        std::abs(p.s_max - 0.3) < 1e-12) {
      witness = true;
      EXPECT_FALSE(p.condition);
      EXPECT_GT(p.mse_soft, p.mse_hard);
    }
    if (std::abs(p.a - 0.25) < 1e-12 && std::abs(p.b - 0.5) < 1e-12 &&
        std::abs(p.s_max - 0.25) < 1e-12) {
      boundary = true;
      EXPECT_TRUE(p.condition);
      EXPECT_TRUE(p.holds);
    }
  }
  EXPECT_TRUE(witness);
  EXPECT_TRUE(boundary);
}

TEST(Grid, SufficiencyAndNecessityHoldWithFourLabels) {
  const TheoremReport r = verify_theorem_grid(4, 0.05);
  for (const auto& v : r.violations) {
    EXPECT_EQ(v.check, "dispersion") << v.detail;
  }
}

TEST(Grid, EvenerTailCanRaiseSoftCorrelation) {
  // Truth 0.05, majority 0.4, tail mass 0.55 split two ways.
  const double wide = std::abs(soft_oracle({0.4, 0.05, 0.35, 0.2}, 1));
  const double even = std::abs(soft_oracle({0.4, 0.05, 0.3, 0.25}, 1));
  EXPECT_GT(even, wide);
  const TheoremReport r = verify_theorem_grid(4, 0.05);
  std::size_t dispersion = 0;
  for (const auto& v : r.violations) dispersion += v.check == "dispersion" ? 1 : 0;
  EXPECT_GT(dispersion, 0u);
}

TEST(Grid, CsvHasOneRowPerPoint) {
  const TheoremReport r = verify_theorem_grid(3, 0.1);
  const auto path = std::filesystem::temp_directory_path() / "rler_theorem_grid.csv";
  write_theorem_csv(path, r);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,b,s_max,mse_h,mse_s,holds");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, r.points.size());
}

TEST(Grid, StepMustDivideOne) { EXPECT_THROW(verify_theorem_grid(3, 0.3), std::exception); }
