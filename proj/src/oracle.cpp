#include "icrenyi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "barrier.hpp"
#include "icrenyi/linprog.hpp"

namespace icrenyi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Artificial box on test-function values; only reachable when the true
// supremum is infinite.
constexpr double kValueBox = 1e9;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
    throw std::domain_error("alpha must lie in (0,1) or (1,inf)");
}

void check_sizes(const FiniteDistribution& p, const FiniteDistribution& q, const MetricSpace& space) {
  if (!p.same_support(q)) throw std::invalid_argument("distributions must share a support set");
  if (p.size() != space.size()) throw std::invalid_argument("distribution and metric space sizes differ");
}

Eigen::VectorXd to_eigen(std::span<const double> w) {
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

// Pairwise difference bounds g_i - g_j <= bound(i, j) as LP rows.
struct DifferenceConstraints {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double range = kInf;  // largest finite pairwise bound
};

DifferenceConstraints difference_constraints(const FunctionClassSpec& gamma, const MetricSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> rows;
  double range = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = gamma.difference_bound(space(i, j));
      if (!std::isfinite(c)) continue;
      rows.emplace_back(i, j, c);
      range = std::max(range, c);
      any = true;
    }
  }
  DifferenceConstraints out;
  out.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  out.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows.size()); ++r) {
    const auto& [i, j, c] = rows[r];
    out.a(r, i) = 1.0;
    out.a(r, j) = -1.0;
    out.b[r] = c;
  }
  out.range = any ? range : kInf;
  return out;
}

// Reusable LP for W^Gamma on a fixed space. After shifting the optimal g so
// that min g = 0, every value lies in [0, range], which keeps the LP bounded
// with the origin feasible.
class IpmSolver {
 public:
  IpmSolver(const FunctionClassSpec& gamma, const MetricSpace& space) : n_(space.size()) {
    gamma.validate();
    const DifferenceConstraints dc = difference_constraints(gamma, space);
    unconstrained_ = gamma.kind == FunctionClassKind::all_functions;
    if (unconstrained_) return;
    const auto n = static_cast<Eigen::Index>(n_);
    a_.resize(dc.a.rows() + n, n);
    a_ << dc.a, Eigen::MatrixXd::Identity(n, n);
    b_.resize(dc.b.size() + n);
    b_ << dc.b, Eigen::VectorXd::Constant(n, dc.range);
  }

  ExtendedReal operator()(std::span<const double> mu, std::span<const double> nu) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) c[static_cast<Eigen::Index>(i)] = mu[i] - nu[i];
    if (unconstrained_) {
      if (c.cwiseAbs().maxCoeff() <= 1e-14) return 0.0;
      return ExtendedReal::infinity();
    }
    const LpResult lp = maximize_lp(a_, b_, c);
    if (lp.unbounded) return ExtendedReal::infinity();
    return std::max(lp.value, 0.0);
  }

 private:
  std::size_t n_;
  bool unconstrained_ = false;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

using FirstTerm = std::function<ExtendedReal(const FiniteDistribution& eta)>;

// Grid search over the simplex for  min_eta first(eta) + W(Q, eta).
PrimalResult primal_grid_search(const FiniteDistribution& q, const FunctionClassSpec& gamma,
                                const MetricSpace& space, const SimplexGrid& grid,
                                const FirstTerm& first) {
  const std::size_t n = q.size();
  if (n < 2 || n > 4) throw std::invalid_argument("primal grid search supports 2 to 4 support points");
  if (grid.resolution < 2) throw std::invalid_argument("simplex grid resolution must be >= 2");
  if (grid.refinement_rounds < 0) throw std::invalid_argument("negative refinement rounds");
  const IpmSolver ipm(gamma, space);

  std::vector<double> best_eta(n, 1.0 / static_cast<double>(n));
  ExtendedReal best = ExtendedReal::infinity();
  bool have_best = false;

  auto consider = [&](const std::vector<double>& eta) {
    double total = 0.0;
    for (double e : eta) total += e;
    std::vector<double> w(eta);
    for (double& e : w) e /= total;
    const FiniteDistribution dist(w, std::vector<std::size_t>(q.support_ids().begin(), q.support_ids().end()));
    const ExtendedReal f = first(dist);
    if (f.is_infinite()) return false;
    const ExtendedReal v = f + ipm(q.weights(), dist.weights());
    if (!have_best || v < best) {
      best = v;
      best_eta = w;
      have_best = true;
      return true;
    }
    return false;
  };

  // Coarse pass over all compositions of `resolution` into n parts.
  const int r = grid.resolution;
  std::vector<int> counts(n, 0);
  std::function<void(std::size_t, int)> enumerate = [&](std::size_t k, int remaining) {
    if (k + 1 == n) {
      counts[k] = remaining;
      std::vector<double> eta(n);
      for (std::size_t i = 0; i < n; ++i) eta[i] = static_cast<double>(counts[i]) / r;
      consider(eta);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[k] = c;
      enumerate(k + 1, remaining - c);
    }
  };
  enumerate(0, r);

  // Refinement: pattern search on a window of +-10 sub-steps, re-centred until
  // the incumbent is interior, then shrink the step by 10x.
  constexpr int kHalfWidth = 10;
  constexpr int kMaxRecentre = 25;
  bool warning = false;
  double step = 1.0 / r;
  const std::size_t free_dims = n - 1;
  for (int round = 0; round < grid.refinement_rounds; ++round) {
    step /= 10.0;
    bool edge = true;
    int recentres = 0;
    while (edge && recentres < kMaxRecentre) {
      ++recentres;
      const std::vector<double> centre = best_eta;
      std::vector<int> offset(free_dims, -kHalfWidth);
      std::vector<int> best_offset(free_dims, 0);
      bool moved = false;
      for (;;) {
        std::vector<double> eta(n);
        double partial = 0.0;
        bool ok = true;
        for (std::size_t i = 0; i < free_dims; ++i) {
          eta[i] = centre[i] + offset[i] * step;
          if (eta[i] < -1e-15) ok = false;
          eta[i] = std::max(eta[i], 0.0);
          partial += eta[i];
        }
        eta[n - 1] = 1.0 - partial;
        if (eta[n - 1] < -1e-15) ok = false;
        eta[n - 1] = std::max(eta[n - 1], 0.0);
        if (ok && consider(eta)) {
          best_offset = offset;
          moved = true;
        }
        std::size_t d = 0;
        while (d < free_dims && ++offset[d] > kHalfWidth) offset[d++] = -kHalfWidth;
        if (d == free_dims) break;
      }
      edge = moved && std::any_of(best_offset.begin(), best_offset.end(),
                                  [](int o) { return std::abs(o) == kHalfWidth; });
    }
    if (edge) warning = true;
  }

  if (!have_best) {
    // Every grid point had an infinite first term.
    return {ExtendedReal::infinity(), q, true};
  }
  return {best, FiniteDistribution(best_eta, std::vector<std::size_t>(q.support_ids().begin(), q.support_ids().end())),
          warning};
}

// f(g) = E_Q g + kappa log E_P |g|^s + offset   (power form), or
// f(g) = E_Q g + E_P log |g| + offset           (log form).
struct DualForm {
  enum class Kind { power, log } kind = Kind::power;
  double kappa = 1.0;
  double exponent = 1.0;
  double offset = 0.0;
};

DualForm renyi_form(double alpha) {
  return {DualForm::Kind::power, 1.0 / (alpha - 1.0), (alpha - 1.0) / alpha,
          (std::log(alpha) + 1.0) / alpha};
}

// Evaluates a DualForm on values g = T y.
bool dual_objective(const DualForm& form, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                    const Eigen::MatrixXd& t, const Eigen::VectorXd& y, double& value,
                    Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const Eigen::VectorXd g = t * y;
  if ((g.array() >= 0.0).any()) return false;
  const Eigen::VectorXd u = -g;
  const Eigen::Index n = g.size();
  Eigen::VectorXd dg = q;
  Eigen::MatrixXd hg = Eigen::MatrixXd::Zero(n, n);
  double v = q.dot(g) + form.offset;

  if (form.kind == DualForm::Kind::log) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p[i] <= 0.0) continue;
      v += p[i] * std::log(u[i]);
      dg[i] -= p[i] / u[i];
      hg(i, i) -= p[i] / (u[i] * u[i]);
    }
  } else {
    const double s = form.exponent;
    double m = -kInf;
    Eigen::VectorXd logt = Eigen::VectorXd::Constant(n, -kInf);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p[i] <= 0.0) continue;
      logt[i] = std::log(p[i]) + s * std::log(u[i]);
      m = std::max(m, logt[i]);
    }
    Eigen::VectorXd w = (logt.array() - m).exp();
    const double total = w.sum();
    const double log_s = m + std::log(total);
    w /= total;
    v += form.kappa * log_s;
    const Eigen::VectorXd r = (s * w.array() / u.array()).matrix();  // -d log S / dg
    dg -= form.kappa * r;
    hg += form.kappa * Eigen::MatrixXd((s * (s - 1.0) * w.array() / u.array().square()).matrix().asDiagonal());
    hg -= form.kappa * r * r.transpose();
  }
  if (!std::isfinite(v)) return false;
  value = v;
  if (grad) *grad = t.transpose() * dg;
  if (hess) *hess = t.transpose() * hg * t;
  return true;
}

// Maximizes a DualForm over y with g = T y, Gamma constraints on y (given by
// `space`/`gamma`), and T y <= -floor.
DualResult solve_dual(const DualForm& form, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                      const Eigen::MatrixXd& t, const FunctionClassSpec& gamma, const MetricSpace& space) {
  gamma.validate();
  const DifferenceConstraints dc = difference_constraints(gamma, space);
  const Eigen::Index m = t.cols();
  const Eigen::Index n = t.rows();
  const bool identity = (n == m) && t.isIdentity();

  // Rows: Gamma differences, T y <= -floor, -T y <= box, and |y| <= box when
  // T is not the identity (K may have a null space).
  const Eigen::Index extra = identity ? 0 : 2 * m;
  Eigen::MatrixXd a(dc.a.rows() + 2 * n + extra, m);
  Eigen::VectorXd b(a.rows());
  a.topRows(dc.a.rows()) = dc.a;
  b.head(dc.a.rows()) = dc.b;
  a.middleRows(dc.a.rows(), n) = t;
  b.segment(dc.a.rows(), n).setConstant(-kNegativityFloor);
  a.middleRows(dc.a.rows() + n, n) = -t;
  b.segment(dc.a.rows() + n, n).setConstant(kValueBox);
  if (!identity) {
    a.middleRows(dc.a.rows() + 2 * n, m) = Eigen::MatrixXd::Identity(m, m);
    a.bottomRows(m) = -Eigen::MatrixXd::Identity(m, m);
    b.tail(2 * m).setConstant(kValueBox);
  }

  auto fn = [&](const Eigen::VectorXd& y, double& value, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    return dual_objective(form, p, q, t, y, value, grad, hess);
  };
  const detail::BarrierResult br = detail::maximize_concave(fn, a, b, Eigen::VectorXd::Constant(m, -1.0));

  DualResult out;
  out.converged = br.converged;
  out.newton_steps = br.newton_steps;
  const Eigen::VectorXd g = t * br.y;
  out.hit_bound = (g.array() < -0.01 * kValueBox).any() || br.y.cwiseAbs().maxCoeff() > 0.99 * kValueBox;
  if (out.hit_bound) {
    out.value = ExtendedReal::infinity();
  } else {
    out.value = br.value;
    out.g = g;
  }
  return out;
}

DualResult solve_dual(const DualForm& form, const FiniteDistribution& p, const FiniteDistribution& q,
                      const FunctionClassSpec& gamma, const MetricSpace& space) {
  check_sizes(p, q, space);
  const auto n = static_cast<Eigen::Index>(p.size());
  return solve_dual(form, to_eigen(p.weights()), to_eigen(q.weights()), Eigen::MatrixXd::Identity(n, n), gamma,
                    space);
}

}  // namespace

FunctionClassSpec FunctionClassSpec::scaled(double s) const {
  if (!(s > 0.0)) throw std::domain_error("class scale must be positive");
  FunctionClassSpec out = *this;
  out.lipschitz_bound *= s;
  out.sup_bound *= s;
  return out;
}

double FunctionClassSpec::difference_bound(double distance) const {
  switch (kind) {
    case FunctionClassKind::lipschitz_ball:
      return lipschitz_bound * distance;
    case FunctionClassKind::sup_norm_ball:
      return 2.0 * sup_bound;
    case FunctionClassKind::lipschitz_and_sup_ball:
      return std::min(lipschitz_bound * distance, 2.0 * sup_bound);
    case FunctionClassKind::all_functions:
      return kInf;
  }
  return kInf;
}

void FunctionClassSpec::validate() const {
  const bool uses_l = kind == FunctionClassKind::lipschitz_ball || kind == FunctionClassKind::lipschitz_and_sup_ball;
  const bool uses_b = kind == FunctionClassKind::sup_norm_ball || kind == FunctionClassKind::lipschitz_and_sup_ball;
  if (uses_l && !(lipschitz_bound > 0.0 && std::isfinite(lipschitz_bound)))
    throw std::domain_error("Lipschitz bound must be positive and finite");
  if (uses_b && !(sup_bound > 0.0 && std::isfinite(sup_bound)))
    throw std::domain_error("sup-norm bound must be positive and finite");
}

ExtendedReal ipm_finite(const FiniteDistribution& mu, const FiniteDistribution& nu, const FunctionClassSpec& gamma,
                        const MetricSpace& space) {
  check_sizes(mu, nu, space);
  if (space.size() > 16) throw std::invalid_argument("ipm_finite supports at most 16 points");
  return IpmSolver(gamma, space)(mu.weights(), nu.weights());
}

PrimalResult ic_primal_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                                  const FunctionClassSpec& gamma, const MetricSpace& space, const SimplexGrid& grid) {
  check_alpha(alpha);
  check_sizes(p, q, space);
  return primal_grid_search(q, gamma, space, grid,
                            [&](const FiniteDistribution& eta) { return renyi_finite(p, eta, alpha); });
}

PrimalResult wcr_ic_primal_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q,
                                      const FunctionClassSpec& gamma, const MetricSpace& space,
                                      const SimplexGrid& grid) {
  check_sizes(p, q, space);
  return primal_grid_search(q, gamma, space, grid,
                            [&](const FiniteDistribution& eta) { return wcr_finite(p, eta); });
}

DualResult ic_dual_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                              const FunctionClassSpec& gamma, const MetricSpace& space) {
  check_alpha(alpha);
  if (space.size() > 6) throw std::invalid_argument("dual oracle supports at most 6 points");
  return solve_dual(renyi_form(alpha), p, q, gamma, space);
}

DualResult wcr_ic_bruteforce(const FiniteDistribution& p, const FiniteDistribution& q, const FunctionClassSpec& gamma,
                             const MetricSpace& space) {
  if (space.size() > 6) throw std::invalid_argument("dual oracle supports at most 6 points");
  return solve_dual({DualForm::Kind::power, 1.0, 1.0, 1.0}, p, q, gamma, space);
}

DualResult rescaled_ic_dual(const FiniteDistribution& p, const FiniteDistribution& q, double alpha,
                            const FunctionClassSpec& gamma, const MetricSpace& space) {
  check_alpha(alpha);
  if (space.size() > 6) throw std::invalid_argument("dual oracle supports at most 6 points");
  return solve_dual({DualForm::Kind::power, alpha / (alpha - 1.0), (alpha - 1.0) / alpha, 1.0}, p, q, gamma, space);
}

DualResult reverse_kl_ic_dual(const FiniteDistribution& p, const FiniteDistribution& q,
                              const FunctionClassSpec& gamma, const MetricSpace& space) {
  if (space.size() > 6) throw std::invalid_argument("dual oracle supports at most 6 points");
  return solve_dual({DualForm::Kind::log, 1.0, 1.0, 1.0}, p, q, gamma, space);
}

DataProcessingResult data_processing_check(const FiniteDistribution& p, const FiniteDistribution& q,
                                           const Eigen::MatrixXd& kernel, double alpha,
                                           const FunctionClassSpec& gamma_out, const MetricSpace& space_out) {
  check_alpha(alpha);
  if (!p.same_support(q)) throw std::invalid_argument("distributions must share a support set");
  if (kernel.rows() != static_cast<Eigen::Index>(p.size()) ||
      kernel.cols() != static_cast<Eigen::Index>(space_out.size()))
    throw std::invalid_argument("kernel shape must be |X| x |Y|");
  if ((kernel.array() < 0.0).any() || ((kernel.rowwise().sum().array() - 1.0).abs() > 1e-12).any())
    throw std::domain_error("kernel must be row-stochastic");
  if (space_out.size() > 6) throw std::invalid_argument("dual oracle supports at most 6 output points");

  const Eigen::VectorXd pv = to_eigen(p.weights());
  const Eigen::VectorXd qv = to_eigen(q.weights());
  const auto ny = kernel.cols();
  const DualForm form = renyi_form(alpha);

  // Pushforwards K[P], K[Q] with Gamma on Y.
  const Eigen::VectorXd kp = kernel.transpose() * pv;
  const Eigen::VectorXd kq = kernel.transpose() * qv;
  const DualResult lhs = solve_dual(form, kp, kq, Eigen::MatrixXd::Identity(ny, ny), gamma_out, space_out);
  // P, Q with K[Gamma]: optimize g on Y, evaluate K g on X.
  const DualResult rhs = solve_dual(form, pv, qv, kernel, gamma_out, space_out);
  if (lhs.value.is_infinite() || rhs.value.is_infinite())
    throw std::domain_error("data processing check requires finite divergences");
  return {lhs.value.value(), rhs.value.value()};
}

}  // namespace icrenyi
