#include "barrier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace icrenyi::detail {

namespace {

struct Centered {
  double psi;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// psi(y) = f(y) + (1/t) sum log(b - A y), kept on the scale of f so that
// line-search comparisons stay accurate as t grows.
bool evaluate(const ConcaveFn& f, const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double t,
              const Eigen::VectorXd& y, bool derivatives, Centered& out) {
  const Eigen::VectorXd slack = b - a * y;
  if ((slack.array() <= 0.0).any()) return false;
  double fv = 0.0;
  Eigen::VectorXd fg;
  Eigen::MatrixXd fh;
  if (!f(y, fv, derivatives ? &fg : nullptr, derivatives ? &fh : nullptr)) return false;
  if (!std::isfinite(fv)) return false;
  out.psi = fv + slack.array().log().sum() / t;
  if (derivatives) {
    const Eigen::VectorXd inv = slack.cwiseInverse();
    out.grad = fg - a.transpose() * inv / t;
    out.hess = fh - a.transpose() * inv.cwiseAbs2().asDiagonal() * a / t;
  }
  return true;
}

}  // namespace

BarrierResult maximize_concave(const ConcaveFn& f, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               Eigen::VectorXd y0, const BarrierOptions& options) {
  Centered cur;
  if (!evaluate(f, a, b, 1.0, y0, false, cur))
    throw std::invalid_argument("maximize_concave: starting point is not strictly feasible");

  BarrierResult result;
  Eigen::VectorXd y = std::move(y0);
  double t = options.initial_t;
  const double constraints = static_cast<double>(a.rows());
  bool centered_ok = true;

  for (int outer = 0; outer < options.max_outer; ++outer) {
    centered_ok = false;
    for (int it = 0; it < options.max_newton_per_center; ++it) {
      evaluate(f, a, b, t, y, true, cur);
      // Newton step on the concave psi: (-H) dy = g.
      Eigen::MatrixXd neg_h = -cur.hess;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
      Eigen::VectorXd dy = ldlt.solve(cur.grad);
      if (ldlt.info() != Eigen::Success || !dy.allFinite()) {
        neg_h.diagonal().array() += 1e-12 * (1.0 + neg_h.diagonal().cwiseAbs().maxCoeff());
        dy = neg_h.ldlt().solve(cur.grad);
      }
      const double decrement = cur.grad.dot(dy);
      ++result.newton_steps;
      if (!(decrement > 1e-14)) {
        centered_ok = true;
        break;
      }
      double step = 1.0;
      Centered trial;
      bool moved = false;
      while (step > 1e-16) {
        const Eigen::VectorXd cand = y + step * dy;
        if (evaluate(f, a, b, t, cand, false, trial) && trial.psi >= cur.psi + 0.25 * step * decrement) {
          y = cand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) {
        centered_ok = true;  // stalled at machine precision
        break;
      }
    }
    if (constraints / t < options.duality_gap) break;
    t *= options.t_growth;
  }

  double fv = 0.0;
  f(y, fv, nullptr, nullptr);
  result.y = std::move(y);
  result.value = fv;
  result.converged = centered_ok && constraints / t < options.duality_gap * options.t_growth;
  return result;
}

}  // namespace icrenyi::detail
