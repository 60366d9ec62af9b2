#pragma once

// Brute-force primal and dual solvers for infimal-convolution divergences and
// IPMs on small finite metric spaces. These are slow and exact (up to grid or
// solver tolerance) and serve as ground truth for the estimators.

#include <Eigen/Dense>
#include <optional>

#include "icrenyi/analytic.hpp"
#include "icrenyi/extended_real.hpp"

namespace icrenyi {

enum class FunctionClassKind { lipschitz_ball, sup_norm_ball, lipschitz_and_sup_ball, all_functions };

/// Test-function class Gamma. The sup-norm variants are shift-invariant:
/// {c + g : |g| <= B}, so on a finite space every class reduces to bounds on
/// pairwise differences g_i - g_j.
struct FunctionClassSpec {
  FunctionClassKind kind = FunctionClassKind::lipschitz_ball;
  double lipschitz_bound = 1.0;
  double sup_bound = 1.0;

  static FunctionClassSpec lipschitz(double l) { return {FunctionClassKind::lipschitz_ball, l, 1.0}; }
  static FunctionClassSpec sup_norm(double b) { return {FunctionClassKind::sup_norm_ball, 1.0, b}; }
  static FunctionClassSpec dudley(double l, double b) {
    return {FunctionClassKind::lipschitz_and_sup_ball, l, b};
  }
  static FunctionClassSpec all() { return {FunctionClassKind::all_functions, 1.0, 1.0}; }

  /// The class s * Gamma.
  [[nodiscard]] FunctionClassSpec scaled(double s) const;

  /// Upper bound on g_i - g_j, or +inf when unconstrained.
  [[nodiscard]] double difference_bound(double distance) const;

  void validate() const;
};

struct SimplexGrid {
  int resolution = 100;
  int refinement_rounds = 3;
};

/// sup_{g in Gamma} sum_i g_i (mu_i - nu_i). For all_functions the result is
/// +inf unless mu == nu.
ExtendedReal ipm_finite(const FiniteDistribution& mu, const FiniteDistribution& nu,
                        const FunctionClassSpec& gamma, const MetricSpace& space);

struct PrimalResult {
  ExtendedReal value;
  FiniteDistribution eta_star;
  /// The local search stopped on the edge of its window; the grid may not
  /// bracket the minimizer.
  bool bracket_warning = false;
};

/// min over eta of R_alpha(P || eta) + W^Gamma(Q, eta) by simplex-grid search
/// with local refinement. Requires at most 4 support points.
PrimalResult ic_primal_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                                  const FunctionClassSpec& gamma, const MetricSpace& space,
                                  const SimplexGrid& grid = {});

/// min over eta of D_inf(P || eta) + W^Gamma(Q, eta), same search.
PrimalResult wcr_ic_primal_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q,
                                      const FunctionClassSpec& gamma, const MetricSpace& space,
                                      const SimplexGrid& grid = {});

struct DualResult {
  ExtendedReal value;
  Eigen::VectorXd g;        ///< maximizing test function (empty when value is +inf)
  bool converged = false;
  bool hit_bound = false;   ///< the artificial |g| box became active; value reported as +inf
  int newton_steps = 0;
};

/// Negativity floor: g < 0 is enforced as g <= -kNegativityFloor.
inline constexpr double kNegativityFloor = 1e-8;

/// sup_{g in Gamma, g < 0} { E_Q g + (alpha-1)^{-1} log E_P |g|^{(alpha-1)/alpha} }
///   + alpha^{-1} (log alpha + 1).
DualResult ic_dual_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                              const FunctionClassSpec& gamma, const MetricSpace& space);

/// sup_{g in Gamma, g < 0} { E_Q g + log E_P |g| } + 1.
DualResult wcr_ic_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q,
                             const FunctionClassSpec& gamma, const MetricSpace& space);

/// alpha * R_alpha^{Gamma/alpha, IC} in its direct dual form
/// sup { E_Q g + alpha/(alpha-1) log E_P |g|^{(alpha-1)/alpha} } + 1.
DualResult rescaled_ic_dual(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                            const FunctionClassSpec& gamma, const MetricSpace& space);

/// alpha -> 1^- limit: sup { E_Q g + E_P log |g| } + 1.
DualResult reverse_kl_ic_dual(const FiniteDistribution& p, const FiniteDistribution& q,
                              const FunctionClassSpec& gamma, const MetricSpace& space);

struct DataProcessingResult {
  double lhs;  ///< IC divergence of the pushforwards K[P], K[Q] with class Gamma on Y
  double rhs;  ///< IC divergence of P, Q with the pulled-back class K[Gamma]
};

/// Both sides of the data-processing inequality for a row-stochastic kernel
/// K (rows indexed by X = support of p, q; columns by the output space).
/// Throws std::domain_error if K is not row-stochastic.
DataProcessingResult data_processing_check(const FiniteDistribution& p, const FiniteDistribution& q,
                                           const Eigen::MatrixXd& kernel, double alpha,
                                           const FunctionClassSpec& gamma_out,
                                           const MetricSpace& space_out);

}  // namespace icrenyi
