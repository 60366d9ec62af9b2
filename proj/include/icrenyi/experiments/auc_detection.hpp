#pragma once

// Rare-subpopulation detection: divergence estimates between a test sample
// and a healthy reference are used as classifier scores, and the AUC of
// healthy-vs-diseased against healthy-vs-healthy scores is reported.

#include <optional>
#include <string>
#include <vector>

#include "icrenyi/estimator.hpp"
#include "icrenyi/experiments/config.hpp"

namespace icrenyi::experiments {

/// Healthy: equal mixture of unit-covariance Gaussians in R^dim.
/// Diseased: each point comes from the rare component with probability rho,
/// whose mean is the first healthy mean displaced by `shift` along a fixed
/// random unit direction.
class RarePopulation {
 public:
  RarePopulation(int dim, int components, double spread, double shift, std::uint64_t seed);

  [[nodiscard]] SampleSet draw(Rng& rng, int n, double rho) const;
  [[nodiscard]] int dim() const { return static_cast<int>(rare_mean_.size()); }
  [[nodiscard]] const Eigen::MatrixXd& healthy_means() const { return means_; }
  [[nodiscard]] const Eigen::VectorXd& rare_mean() const { return rare_mean_; }

 private:
  Eigen::MatrixXd means_;  // dim x components
  Eigen::VectorXd rare_mean_;
};

struct AucDetectionConfig {
  std::vector<ObjectiveFamily> families = {ObjectiveFamily::ic_wcr()};
  std::vector<double> rho = {0.1};
  std::vector<int> sample_sizes = {20000};
  int pairs = 20;  ///< R negatives and R positives per cell
  int dim = 16;
  int components = 3;
  double spread = 3.0;  ///< healthy means ~ N(0, spread^2 I)
  double shift = 4.0;
  std::uint64_t population_seed = 20240601;
  NetConfig net{{32, 32}, FinalLayer::poly_softplus};
  TrainConfig train = default_train();

  static TrainConfig default_train();
  static AucDetectionConfig from_json(const json& j);
  [[nodiscard]] json to_json() const;
  void validate() const;
};

struct AucRow {
  ObjectiveFamily family;
  double rho;
  int sample_size;
  double auc;  ///< NaN if every run of one class failed
  std::vector<double> negatives;  ///< successful scores, ordered by seed
  std::vector<double> positives;
  int n_failed = 0;
};

inline const char* kAucCsvHeader = "family,alpha,rho,sample_size,auc";

/// With a nonempty `out_dir`, writes results.csv, config.echo and
/// runs/*.json (one record per training run).
std::vector<AucRow> auc_detection(const AucDetectionConfig& cfg, int jobs = 1, const std::string& out_dir = {});

std::string auc_csv(const std::vector<AucRow>& rows);

}  // namespace icrenyi::experiments
