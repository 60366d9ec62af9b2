#pragma once

#include <Eigen/Dense>

#include "icrenyi/mlp.hpp"
#include "icrenyi/rng.hpp"

namespace icrenyi {

enum class PenaltySampling { interpolates, data_points };

/// Soft one-sided gradient penalty  lambda * mean max(0, |grad g| / L - 1)^2
/// standing in for the L-Lipschitz constraint.
struct PenaltySpec {
  double weight = 10.0;    ///< lambda >= 0
  double lipschitz = 1.0;  ///< target bound L > 0
  PenaltySampling sampling = PenaltySampling::interpolates;

  void validate() const;
};

/// Points at which the penalty is evaluated: t x_P + (1 - t) x_Q with
/// t ~ U(0,1) and a fresh random pairing (interpolates), or both batches
/// side by side (data_points).
Eigen::MatrixXd penalty_points(const Eigen::MatrixXd& p_batch, const Eigen::MatrixXd& q_batch,
                               PenaltySampling sampling, Rng& rng);

/// Penalty value at the given points; if `grads` is non-null the penalty's
/// gradient w.r.t. the parameters of f is added to it (times `sign`).
/// The gradient norm is floored as sqrt(|grad|^2 + 1e-12).
double gradient_penalty(const Mlp& f, const Eigen::MatrixXd& points, const PenaltySpec& spec,
                        Parameters* grads = nullptr, double sign = 1.0);

/// Convenience overload that draws the penalty points itself.
double penalty(const Mlp& f, const Eigen::MatrixXd& p_batch, const Eigen::MatrixXd& q_batch,
               const PenaltySpec& spec, Rng& rng, Parameters* grads = nullptr, double sign = 1.0);

}  // namespace icrenyi
