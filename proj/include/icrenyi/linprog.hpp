#pragma once

#include <Eigen/Dense>

namespace icrenyi {

struct LpResult {
  double value = 0.0;
  Eigen::VectorXd x;
  bool unbounded = false;
  int pivots = 0;
};

/// Dense simplex for  max c'x  s.t.  A x <= b, x >= 0  with b >= 0, so the
/// origin is a feasible basis. Bland's rule; intended for the small
/// problems built by the finite-space oracles.
LpResult maximize_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace icrenyi
