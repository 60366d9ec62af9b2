#pragma once

// Batch-level variational objectives. Each is a functional of test-function
// values on a P-batch and a Q-batch whose supremum over the test-function
// class is the corresponding divergence.

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace icrenyi {

enum class ObjectiveTag { dv_renyi, cc_renyi, cc_wcr, ic_renyi, ic_rescaled, ic_wcr, ipm };

std::string to_string(ObjectiveTag t);
ObjectiveTag objective_tag_from_string(const std::string& s);

struct ObjectiveFamily {
  ObjectiveTag tag = ObjectiveTag::cc_renyi;
  std::optional<double> alpha;

  static ObjectiveFamily dv_renyi(double alpha) { return {ObjectiveTag::dv_renyi, alpha}; }
  static ObjectiveFamily cc_renyi(double alpha) { return {ObjectiveTag::cc_renyi, alpha}; }
  static ObjectiveFamily cc_wcr() { return {ObjectiveTag::cc_wcr, std::nullopt}; }
  static ObjectiveFamily ic_renyi(double alpha) { return {ObjectiveTag::ic_renyi, alpha}; }
  static ObjectiveFamily ic_rescaled(double alpha) { return {ObjectiveTag::ic_rescaled, alpha}; }
  static ObjectiveFamily ic_wcr() { return {ObjectiveTag::ic_wcr, std::nullopt}; }
  /// E_P g - E_Q g, the Wasserstein-critic baseline.
  static ObjectiveFamily ipm() { return {ObjectiveTag::ipm, std::nullopt}; }

  [[nodiscard]] bool needs_alpha() const;
  /// Test functions must be strictly negative.
  [[nodiscard]] bool negative_class() const;
  /// The function class is enforced through a gradient penalty.
  [[nodiscard]] bool penalized() const;
  [[nodiscard]] std::string name() const;
  /// Throws std::invalid_argument on a missing/extra/invalid alpha.
  void validate() const;
};

/// A negative-class objective saw g >= 0.
class ConstraintViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Test-function values with optional per-sample weights. Empty weights
/// mean uniform; otherwise they must be nonnegative and are normalised.
struct BatchOutputs {
  Eigen::VectorXd g_on_p;
  Eigen::VectorXd g_on_q;
  Eigen::VectorXd w_p;
  Eigen::VectorXd w_q;
};

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd d_p;  ///< d value / d g_on_p
  Eigen::VectorXd d_q;  ///< d value / d g_on_q
  /// Some |g|^{(alpha-1)/alpha} exceeded 1e12 (possible for alpha < 1).
  bool overflow_flag = false;
};

inline constexpr double kAbsClamp = 1e-12;
inline constexpr double kOverflowFlag = 1e12;

/// Objective value minus `penalty_value`, with gradients when `want_grad`.
ObjectiveValue evaluate_objective(const ObjectiveFamily& family, const BatchOutputs& batch,
                                  double penalty_value = 0.0, bool want_grad = true);

/// Numerically stable log of the (weighted) mean of exp(x).
double log_mean_exp(const Eigen::VectorXd& x, const Eigen::VectorXd& w = {});

double dv_renyi_objective(const Eigen::VectorXd& phi_on_p, const Eigen::VectorXd& phi_on_q, double alpha);
double cc_renyi_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha);
double cc_wcr_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q);
double ic_renyi_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha,
                          double penalty_value);
double ic_rescaled_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha,
                             double penalty_value);
double ic_wcr_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double penalty_value);

}  // namespace icrenyi
