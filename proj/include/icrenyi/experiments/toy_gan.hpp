#pragma once

// Two-dimensional GAN: a generator Q_psi = h_psi(Z) is trained to minimise
// an estimated divergence D(P || Q_psi) whose critic is trained alongside.

#include <optional>
#include <string>
#include <vector>

#include "icrenyi/experiments/config.hpp"
#include "icrenyi/mlp.hpp"
#include "icrenyi/objectives.hpp"
#include "icrenyi/penalty.hpp"
#include "icrenyi/rng.hpp"

namespace icrenyi::experiments {

enum class GanTarget { gaussian_ring_8, two_moons, grid_25 };

std::string to_string(GanTarget t);
GanTarget gan_target_from_string(const std::string& s);

struct TargetSpec {
  GanTarget kind = GanTarget::gaussian_ring_8;
  double radius = 2.0;     ///< ring radius, or grid half-width
  double mode_std = 0.05;  ///< per-mode standard deviation (moons: noise)

  /// 2 x n samples.
  [[nodiscard]] Eigen::MatrixXd sample(Rng& rng, int n) const;
  /// Mode centres (2 x k); empty for two_moons.
  [[nodiscard]] Eigen::MatrixXd centres() const;
};

/// Number of centres with at least `min_fraction` of the samples within
/// `radius` of them.
int mode_coverage(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& centres, double radius,
                  double min_fraction = 0.02);

/// Energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| (V-statistic: the
/// self-distance expectations include the zero diagonal).
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GanConfig {
  /// Critic objective; "wasserstein_gp" in config files maps to the ipm tag.
  ObjectiveFamily family = ObjectiveFamily::ic_wcr();
  TargetSpec target{};
  int noise_dim = 2;
  std::vector<int> generator_hidden = {64, 64};
  /// Final layer is forced to identity for the Wasserstein baseline.
  NetConfig critic{{64, 64}, FinalLayer::neg_abs};
  int critic_steps = 5;
  int generator_steps = 20000;
  int batch = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.9;
  PenaltySpec penalty{10.0, 1.0, PenaltySampling::interpolates};
  int eval_every = 500;
  int eval_samples = 10000;
  /// Stop once coverage reaches this many modes at an evaluation.
  std::optional<int> stop_at_coverage;
  std::uint64_t seed = 0;

  static GanConfig from_json(const json& j);
  [[nodiscard]] json to_json() const;
  void validate() const;
};

struct GanLogEntry {
  int step = 0;  ///< generator steps completed
  double critic_objective = 0.0;
  std::optional<int> coverage;  ///< at evaluation steps
};

struct GanResult {
  int steps_completed = 0;
  bool nan_failure = false;
  std::string failure_reason;
  int mode_coverage = 0;         ///< 0 for targets without modes
  double energy_distance = 0.0;  ///< NaN after a failure
  std::optional<int> first_full_coverage_step;  ///< first evaluation with >= stop_at_coverage (or all) modes
  std::vector<GanLogEntry> log;
  std::optional<Mlp> generator;  ///< final weights
  double wall_seconds = 0.0;
};

GanResult train_gan(const GanConfig& cfg);

struct ToyGanExperiment {
  std::vector<GanConfig> runs;  ///< one per (family, seed)
  static ToyGanExperiment from_json(const json& j);
  [[nodiscard]] json to_json() const;
};

inline constexpr const char* kGanCsvHeader = "family,alpha,seed,steps,mode_coverage,energy_distance,nan_failure";
std::string gan_csv(const ToyGanExperiment& exp, const std::vector<GanResult>& results);

/// Trains every run (up to `jobs` at a time). With a nonempty `out_dir`,
/// writes results.csv, config.echo, runs/<run>.log.csv and
/// runs/<run>.generator.json.
std::vector<GanResult> toy_gan(const ToyGanExperiment& exp, int jobs = 1, const std::string& out_dir = {});

}  // namespace icrenyi::experiments
