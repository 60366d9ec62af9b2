#pragma once

// Bias/variance/MSE of Rényi estimators between 1-D Gaussians
// P = N(mu_p, sigma^2), Q = N(mu_q, sigma^2) over a grid of alpha and mu_q.

#include <optional>
#include <string>
#include <vector>

#include "icrenyi/estimator.hpp"
#include "icrenyi/experiments/config.hpp"

namespace icrenyi::experiments {

struct VarianceStudyConfig {
  /// Any of dv_renyi, cc_renyi, cc_wcr; alpha comes from the ladder.
  std::vector<ObjectiveTag> families = {ObjectiveTag::dv_renyi, ObjectiveTag::cc_renyi};
  std::vector<double> alphas = {2.0, 5.0, 10.0};
  std::vector<double> mu_q = {0.5, 1.0, 2.0, 3.0};
  double mu_p = 0.0;
  double sigma = 1.0;
  int sample_size = 10000;  ///< points per distribution per run
  int replicates = 50;
  /// Final layer for the negative-class families; dv_renyi always uses identity.
  NetConfig net{{64}, FinalLayer::poly_softplus};
  TrainConfig train{};

  static VarianceStudyConfig from_json(const json& j);
  [[nodiscard]] json to_json() const;
  void validate() const;
};

struct VarianceRow {
  ObjectiveTag family;
  std::optional<double> alpha;  ///< absent for cc_wcr
  double mu_q;
  double mean;
  double variance;
  std::optional<double> mse;  ///< absent for WCR: the exact value is infinite
  double failure_rate;
  int n_runs;
  int n_failed;
};

struct VarianceStudyResult {
  std::vector<VarianceRow> rows;  ///< sorted by (family, alpha, mu_q)
  std::vector<std::vector<EstimateResult>> runs;  ///< aligned with rows
};

inline const char* kVarianceCsvHeader = "family,alpha,mu_q,mean,variance,mse,failure_rate";

/// Runs every grid cell (up to `jobs` concurrently). With a nonempty
/// `out_dir`, writes results.csv, results.dat, config.echo and runs/*.json.
VarianceStudyResult variance_study(const VarianceStudyConfig& cfg, int jobs = 1, const std::string& out_dir = {});

/// One cell of the grid, exposed for tests and acceptance checks.
ReplicateSummary variance_cell(const VarianceStudyConfig& cfg, const ObjectiveFamily& family, double mu_q,
                               std::optional<double> reference, int jobs = 1);

std::string variance_csv(const VarianceStudyResult& r);

}  // namespace icrenyi::experiments
