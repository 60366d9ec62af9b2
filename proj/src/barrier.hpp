#pragma once

// Log-barrier Newton method for  max f(y)  s.t.  A y <= b  with f smooth and
// concave on an open domain. Used by the dual oracles.

#include <Eigen/Dense>
#include <functional>

namespace icrenyi::detail {

/// Evaluates f at y. Returns false if y is outside the domain of f.
/// Gradient and Hessian are written only when the pointers are non-null.
using ConcaveFn = std::function<bool(const Eigen::VectorXd& y, double& value,
                                     Eigen::VectorXd* grad, Eigen::MatrixXd* hess)>;

struct BarrierOptions {
  double initial_t = 1.0;
  double t_growth = 20.0;
  double duality_gap = 1e-11;
  int max_newton_per_center = 200;
  int max_outer = 60;
};

struct BarrierResult {
  Eigen::VectorXd y;
  double value = 0.0;
  bool converged = false;
  int newton_steps = 0;
};

/// y0 must be strictly feasible (A y0 < b) and inside the domain of f.
BarrierResult maximize_concave(const ConcaveFn& f, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               Eigen::VectorXd y0, const BarrierOptions& options = {});

}  // namespace icrenyi::detail
