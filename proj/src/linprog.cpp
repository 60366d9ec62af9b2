#include "icrenyi/linprog.hpp"

#include <stdexcept>

namespace icrenyi {

LpResult maximize_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("maximize_lp: shape mismatch");
  if ((b.array() < 0.0).any()) throw std::invalid_argument("maximize_lp: rhs must be nonnegative");

  constexpr double kEps = 1e-12;
  // Tableau rows 0..m-1 are constraints, row m is the reduced-cost row.
  // Columns: n structural, m slack, 1 rhs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  Eigen::VectorXi basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = static_cast<int>(n + i);

  LpResult result;
  for (;;) {
    // Bland: lowest-index column with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double coef = t(i, enter);
      if (coef <= kEps) continue;
      const double ratio = t(i, n + m) / coef;
      if (leave < 0 || ratio < best_ratio - kEps ||
          (ratio <= best_ratio + kEps && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) {
      result.unbounded = true;
      return result;
    }

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[leave] = static_cast<int>(enter);
    ++result.pivots;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (basis[i] < n) result.x[basis[i]] = t(i, n + m);
  result.value = c.dot(result.x);
  return result;
}

}  // namespace icrenyi
