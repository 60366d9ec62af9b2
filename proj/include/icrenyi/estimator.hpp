#pragma once

// Plug-in neural estimators: maximise a variational objective over the
// parameters of an MLP test function with Adam.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icrenyi/adam.hpp"
#include "icrenyi/analytic.hpp"
#include "icrenyi/mlp.hpp"
#include "icrenyi/objectives.hpp"
#include "icrenyi/oracle.hpp"
#include "icrenyi/penalty.hpp"
#include "icrenyi/rng.hpp"

namespace icrenyi {

/// Points are columns. With empty `weights` the set is an empirical sample
/// and training draws minibatches from it; with weights it encodes a finite
/// distribution exactly and every step uses the full weighted batch.
struct SampleSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  [[nodiscard]] Eigen::Index dim() const { return points.rows(); }
  [[nodiscard]] Eigen::Index size() const { return points.cols(); }
  [[nodiscard]] bool weighted() const { return weights.size() != 0; }
};

struct NetConfig {
  std::vector<int> hidden = {64};
  FinalLayer final_layer = FinalLayer::poly_softplus;
};

enum class EvalMode { full_sample, window_average };

std::string to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 10000;  ///< optimizer steps
  int minibatch = 500;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int estimate_window = 100;
  EvalMode eval_mode = EvalMode::window_average;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  PenaltySpec penalty{};  ///< used by penalised families only
  /// Network initialisation seed; defaults to one derived from `seed`.
  std::optional<std::uint64_t> init_seed;

  void validate() const;
};

struct EstimateResult {
  std::optional<double> estimate;  ///< absent on failure
  std::vector<double> trace;       ///< penalised objective per completed step
  bool nan_failure = false;
  std::string failure_reason;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  /// Weighted mode only: the trace decreased by more than 1e-6 after the
  /// first 10% of steps.
  bool trace_flag = false;
};

/// Checks the family / final-layer pairing: dv_renyi and ipm require the
/// identity layer, the other families neg_abs or poly_softplus.
void validate_family_net(const ObjectiveFamily& family, const NetConfig& net);

EstimateResult estimate_divergence(const SampleSet& p, const SampleSet& q, const ObjectiveFamily& family,
                                   const NetConfig& net, const TrainConfig& train, Mlp* trained = nullptr);

/// Objective at a fixed network on the full sets (penalty included for
/// penalised families, evaluated at points drawn with `rng`).
double evaluate_network(const Mlp& f, const SampleSet& p, const SampleSet& q, const ObjectiveFamily& family,
                        const PenaltySpec& penalty, Rng& rng);

struct ReplicateSpec {
  std::function<SampleSet(Rng&)> draw_p;
  std::function<SampleSet(Rng&)> draw_q;
  ObjectiveFamily family;
  NetConfig net;
  TrainConfig train;  ///< train.seed is the base seed; run i uses base + i
  std::optional<double> reference;
};

struct ReplicateSummary {
  int n_runs = 0;
  int n_failed = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased, over successful runs (0 for one run)
  double mse = 0.0;       ///< NaN when no reference was supplied
  double failure_rate = 0.0;
  std::vector<EstimateResult> runs;  ///< ordered by seed
};

class AllRunsFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Independent training runs, up to `jobs` at a time. Each run draws its own
/// data from an Rng seeded with its seed.
ReplicateSummary run_replicates(const ReplicateSpec& spec, int n_runs, int jobs = 1);

struct TabularOptions {
  int max_iterations = 20000;
  double tolerance = 1e-11;
  double negativity = kNegativityFloor;
};

struct TabularResult {
  double value = 0.0;
  Eigen::VectorXd g;
  int iterations = 0;
};

/// Euclidean projection onto {g : g_i - g_j <= C_ij, g_i <= -negativity}
/// (Dykstra's alternating projections).
Eigen::VectorXd project_difference_constraints(const Eigen::VectorXd& g, const Eigen::MatrixXd& bounds,
                                               double negativity, int max_sweeps = 2000);

/// Weighted-batch estimate with a tabular test function constrained exactly
/// to Gamma, maximised by projected gradient ascent. Supports the
/// negative-class families; the objective is evaluated without penalty.
TabularResult estimate_tabular(const FiniteDistribution& p, const FiniteDistribution& q,
                               const ObjectiveFamily& family, const FunctionClassSpec& gamma,
                               const MetricSpace& space, const TabularOptions& opts = {});

}  // namespace icrenyi
