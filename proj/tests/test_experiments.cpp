#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "icrenyi/analytic.hpp"
#include "icrenyi/experiments/auc.hpp"
#include "icrenyi/experiments/auc_detection.hpp"
#include "icrenyi/experiments/oracle_suite.hpp"
#include "icrenyi/experiments/toy_gan.hpp"
#include "icrenyi/experiments/variance_study.hpp"
#include "icrenyi/rng.hpp"

using namespace icrenyi;
using namespace icrenyi::experiments;
namespace fs = std::filesystem;

namespace {

// Fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("icrenyi_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Auc, MatchesPairwiseCountWithTies) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> pos(1 + rng.index(50)), neg(1 + rng.index(50));
    // Small integer range forces many ties, within and across classes.
    for (auto& x : pos) x = static_cast<double>(rng.index(6));
    for (auto& x : neg) x = static_cast<double>(rng.index(6)) - 1.0;
    EXPECT_DOUBLE_EQ(auc_rank(pos, neg), pairwise_auc(pos, neg));
  }
}

TEST(Auc, EdgeCases) {
  EXPECT_EQ(auc_rank({3, 4, 5}, {0, 1, 2}), 1.0);
  EXPECT_EQ(auc_rank({0, 1}, {2, 3}), 0.0);
  EXPECT_EQ(auc_rank({1, 1}, {1, 1, 1}), 0.5);
  EXPECT_THROW(auc_rank({}, {1.0}), std::invalid_argument);
  EXPECT_THROW(auc_rank({NAN}, {1.0}), std::invalid_argument);
}

TEST(Configs, UnknownKeysAreErrors) {
  EXPECT_THROW(VarianceStudyConfig::from_json({{"replicats", 5}}), ConfigError);
  EXPECT_THROW(VarianceStudyConfig::from_json({{"train", {{"epoch", 5}}}}), ConfigError);
  EXPECT_THROW(AucDetectionConfig::from_json({{"net", {{"hiden", {4}}}}}), ConfigError);
  EXPECT_THROW(ToyGanExperiment::from_json({{"target", {{"kind", "gaussian_ring_8"}, {"sigma", 1}}}}), ConfigError);
  EXPECT_THROW(OracleSuiteConfig::from_json({{"sed", 1}}), ConfigError);
}

TEST(Configs, DomainErrors) {
  EXPECT_THROW(VarianceStudyConfig::from_json({{"families", {"ic_wcr"}}}), ConfigError);
  EXPECT_THROW(VarianceStudyConfig::from_json({{"families", {"cc_wcr"}}, {"mse_families", {"cc_wcr"}}}), ConfigError);
  EXPECT_NO_THROW(VarianceStudyConfig::from_json({{"families", {"cc_wcr"}}}));
  EXPECT_THROW(AucDetectionConfig::from_json({{"rho", {1.0}}}), ConfigError);
  EXPECT_THROW(AucDetectionConfig::from_json({{"rho", {-0.1}}}), ConfigError);
  EXPECT_NO_THROW(AucDetectionConfig::from_json({{"rho", {0.0, 0.1}}}));
  EXPECT_THROW(ToyGanExperiment::from_json({{"families", {"dv_renyi"}}}), ConfigError);
  EXPECT_THROW(ToyGanExperiment::from_json({{"noise_dim", 0}}), ConfigError);
  EXPECT_THROW(ToyGanExperiment::from_json({{"critic_steps", 0}}), ConfigError);
  EXPECT_THROW(ToyGanExperiment::from_json({{"target", {{"kind", "spiral"}}}}), ConfigError);
  EXPECT_THROW(OracleSuiteConfig::from_json({{"checks", {"nonsense"}}}), ConfigError);
  EXPECT_THROW(VarianceStudyConfig::from_json({{"experiment", "toy_gan"}}), ConfigError);
}

TEST(Configs, RoundTrip) {
  const auto v = VarianceStudyConfig::from_json({{"alphas", {2.0, 7.0}}, {"train", {{"epochs", 12}, {"estimate_window", 4}, {"seed", 9}}}});
  EXPECT_EQ(VarianceStudyConfig::from_json(v.to_json()).to_json(), v.to_json());
  const auto a = AucDetectionConfig::from_json({{"families", {"ic_wcr", {{"family", "ic_renyi"}, {"alpha", 3.0}}}}});
  EXPECT_EQ(AucDetectionConfig::from_json(a.to_json()).to_json(), a.to_json());
  const auto g = ToyGanExperiment::from_json(
      {{"families", {"wasserstein_gp", {{"family", "ic_rescaled"}, {"alpha", 2.0}}}}, {"seeds", {3, 4}}});
  ASSERT_EQ(g.runs.size(), 4u);
  EXPECT_EQ(g.runs[0].family.tag, ObjectiveTag::ipm);
  EXPECT_EQ(g.runs[3].seed, 4u);
  EXPECT_EQ(ToyGanExperiment::from_json(g.to_json()).to_json(), g.to_json());
  const auto o = OracleSuiteConfig::from_json({{"checks", {"duality"}}, {"seed", 3}});
  EXPECT_EQ(OracleSuiteConfig::from_json(o.to_json()).to_json(), o.to_json());
}

TEST(GanMetrics, EnergyDistance) {
  const TargetSpec target;
  Rng rng(2);
  const auto a = target.sample(rng, 1500), b = target.sample(rng, 1500);
  EXPECT_EQ(energy_distance(a, a), 0.0);
  EXPECT_NEAR(energy_distance(a, b), 0.0, 1e-2);
  Eigen::MatrixXd shifted = b;
  shifted.row(0).array() += 1.0;
  EXPECT_GT(energy_distance(a, shifted), 0.1);
  EXPECT_THROW(energy_distance(a, Eigen::MatrixXd(3, 4)), std::invalid_argument);
}

TEST(GanMetrics, ModeCoverage) {
  TargetSpec target;
  Rng rng(3);
  const auto c = target.centres();
  ASSERT_EQ(c.cols(), 8);
  EXPECT_NEAR(c.col(0).norm(), target.radius, 1e-12);
  const auto x = target.sample(rng, 4000);
  EXPECT_EQ(mode_coverage(x, c, 3 * target.mode_std), 8);
  Eigen::MatrixXd collapsed = c.col(2).replicate(1, 100);
  EXPECT_EQ(mode_coverage(collapsed, c, 3 * target.mode_std), 1);
  target.kind = GanTarget::grid_25;
  EXPECT_EQ(mode_coverage(target.sample(rng, 5000), target.centres(), 3 * target.mode_std), 25);
}

TEST(RarePopulation, RareComponentOnlyWhenContaminated) {
  const RarePopulation pop(4, 3, 3.0, 4.0, 11);
  EXPECT_NEAR((pop.rare_mean() - pop.healthy_means().col(0)).norm(), 4.0, 1e-12);
  Rng rng(4);
  const auto healthy = pop.draw(rng, 6000, 0.0), diseased = pop.draw(rng, 6000, 0.5);
  const Eigen::VectorXd expect_healthy = pop.healthy_means().rowwise().mean();
  const Eigen::VectorXd expect_diseased = 0.5 * expect_healthy + 0.5 * pop.rare_mean();
  EXPECT_LT((healthy.points.rowwise().mean() - expect_healthy).norm(), 0.2);
  EXPECT_LT((diseased.points.rowwise().mean() - expect_diseased).norm(), 0.2);
}

TEST(OracleSuite, DefaultChecksPass) {
  OracleSuiteConfig cfg;
  cfg.lower_bound_probes = 2000;
  const auto report = oracle_suite(cfg);
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_EQ(report.checks.size(), oracle_check_names().size());
}

TEST(OracleSuite, MutatedClosedFormIsCaught) {
  OracleSuiteConfig cfg;
  // First branch with c in place of 1 - c.
  cfg.closed_form = [](double x, double c, double l, double alpha) {
    return alpha * l * x < 1.0 ? c * l * x : ic_dirac_mixture(x, c, l, alpha);
  };
  const auto r = check_closed_forms(cfg);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.failures, 3);
  cfg.closed_form = nullptr;
  cfg.closed_form_perturbation = 1e-3;
  EXPECT_FALSE(check_closed_forms(cfg).passed);
}

TEST(Experiments, VarianceStudySmoke) {
  const auto dir = scratch("variance");
  auto cfg = VarianceStudyConfig::from_json({{"families", {"dv_renyi", "cc_renyi", "cc_wcr"}},
                                             {"alphas", {2.0}},
                                             {"mu_q", {0.0}},
                                             {"replicates", 2},
                                             {"sample_size", 500},
                                             {"train", {{"epochs", 300}, {"minibatch", 200}}}});
  const auto res = variance_study(cfg, 2, dir.string());
  ASSERT_EQ(res.rows.size(), 3u);
  for (const auto& row : res.rows) {
    EXPECT_NEAR(row.mean, 0.0, 0.1) << to_string(row.family);
    EXPECT_EQ(row.n_runs, 2);
    EXPECT_EQ(row.mse.has_value(), row.family != ObjectiveTag::cc_wcr);
  }
  EXPECT_EQ(first_line(dir / "results.csv"), kVarianceCsvHeader);
  const auto echoed = VarianceStudyConfig::from_json(load_json_file((dir / "config.echo").string()));
  EXPECT_EQ(echoed.to_json(), cfg.to_json());
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "runs"), fs::directory_iterator{}), 6);
}

TEST(Experiments, AucDetectionSmoke) {
  const auto dir = scratch("auc");
  auto cfg = AucDetectionConfig::from_json(
      {{"dim", 4}, {"pairs", 3}, {"sample_sizes", {400}}, {"rho", {0.0, 0.3}}, {"train", {{"epochs", 60}, {"estimate_window", 20}, {"minibatch", 200}}}});
  const auto rows = auc_detection(cfg, 1, dir.string());
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.negatives.size() + r.positives.size() + static_cast<std::size_t>(r.n_failed), 6u);
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
  }
  EXPECT_EQ(first_line(dir / "results.csv"), kAucCsvHeader);
  EXPECT_NO_THROW(AucDetectionConfig::from_json(load_json_file((dir / "config.echo").string())));
}

TEST(Experiments, ToyGanSmoke) {
  const auto dir = scratch("gan");
  auto exp = ToyGanExperiment::from_json({{"families", {"wasserstein_gp", "ic_wcr"}},
                                          {"generator_steps", 40},
                                          {"eval_every", 20},
                                          {"eval_samples", 500},
                                          {"generator_hidden", {16}},
                                          {"critic", {{"hidden", {16}}}}});
  const auto results = toy_gan(exp, 1, dir.string());
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) {
    EXPECT_FALSE(r.nan_failure) << r.failure_reason;
    EXPECT_EQ(r.steps_completed, 40);
    EXPECT_EQ(r.log.size(), 40u);
    EXPECT_TRUE(r.log.back().coverage.has_value());
    ASSERT_TRUE(r.generator.has_value());
    EXPECT_TRUE(std::isfinite(r.energy_distance));
  }
  EXPECT_EQ(first_line(dir / "results.csv"), kGanCsvHeader);
  EXPECT_TRUE(fs::exists(dir / "runs" / "ic_wcr_seed0.generator.json"));
  EXPECT_TRUE(fs::exists(dir / "runs" / "wasserstein_gp_seed0.log.csv"));
  EXPECT_EQ(ToyGanExperiment::from_json(load_json_file((dir / "config.echo").string())).to_json(), exp.to_json());
}

TEST(Experiments, ToyGanIsReproducible) {
  GanConfig cfg;
  cfg.generator_steps = 15;
  cfg.eval_every = 5;
  cfg.eval_samples = 200;
  cfg.generator_hidden = {8};
  cfg.critic.hidden = {8};
  cfg.seed = 12;
  const auto a = train_gan(cfg), b = train_gan(cfg);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].critic_objective, b.log[i].critic_objective);
  EXPECT_EQ(a.energy_distance, b.energy_distance);
}
