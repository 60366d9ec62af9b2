#include "icrenyi/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace icrenyi {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
    throw std::domain_error("alpha must lie in (0,1) or (1,inf), got " + std::to_string(alpha));
}

void check_shared(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (!p.same_support(q)) throw std::invalid_argument("distributions must share a support set");
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> weights)
    : FiniteDistribution(weights, [&] {
        std::vector<std::size_t> ids(weights.size());
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        return ids;
      }()) {}

FiniteDistribution::FiniteDistribution(std::vector<double> weights,
                                       std::vector<std::size_t> support_ids)
    : weights_(std::move(weights)), support_ids_(std::move(support_ids)) {
  if (weights_.empty()) throw std::invalid_argument("empty distribution");
  if (weights_.size() != support_ids_.size())
    throw std::invalid_argument("weights and support ids differ in length");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative or NaN probability weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kSumTolerance)
    throw std::invalid_argument("weights sum to " + std::to_string(total) + ", not 1");
}

FiniteDistribution FiniteDistribution::dirac(std::size_t n, std::size_t i) {
  std::vector<double> w(n, 0.0);
  w.at(i) = 1.0;
  return FiniteDistribution(std::move(w));
}

MetricSpace::MetricSpace(std::size_t n, std::vector<double> distances)
    : n_(n), d_(std::move(distances)) {
  if (d_.size() != n * n) throw std::invalid_argument("distance matrix must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if ((*this)(i, i) != 0.0) throw std::invalid_argument("metric diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (!((*this)(i, j) >= 0.0)) throw std::invalid_argument("negative distance");
      if ((*this)(i, j) != (*this)(j, i)) throw std::invalid_argument("metric must be symmetric");
      for (std::size_t k = 0; k < n; ++k) {
        const double slack = 1e-12 * (1.0 + (*this)(i, j));
        if ((*this)(i, j) > (*this)(i, k) + (*this)(k, j) + slack)
          throw std::invalid_argument("triangle inequality violated");
      }
    }
  }
}

MetricSpace MetricSpace::line(std::span<const double> coordinates) {
  const std::size_t n = coordinates.size();
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::abs(coordinates[i] - coordinates[j]);
  return MetricSpace(n, std::move(d));
}

double MetricSpace::diameter() const { return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end()); }

ExtendedReal renyi_finite(const FiniteDistribution& p, const FiniteDistribution& q, double alpha) {
  check_alpha(alpha);
  check_shared(p, q);
  // log sum_i p_i^alpha q_i^(1-alpha) over {p_i > 0, q_i > 0}, max-shifted.
  std::vector<double> logs;
  logs.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      if (alpha > 1.0) return ExtendedReal::infinity();
      continue;
    }
    logs.push_back(alpha * std::log(p[i]) + (1.0 - alpha) * std::log(q[i]));
  }
  // alpha < 1 with disjoint supports: log 0 times a negative factor.
  if (logs.empty()) return ExtendedReal::infinity();
  const double m = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  const double value = (m + std::log(s)) / (alpha * (alpha - 1.0));
  // Rounding can leave identical inputs a few ulps below zero.
  return std::max(value, 0.0);
}

ExtendedReal wcr_finite(const FiniteDistribution& p, const FiniteDistribution& q) {
  check_shared(p, q);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return ExtendedReal::infinity();
    best = std::max(best, std::log(p[i]) - std::log(q[i]));
  }
  return std::max(best, 0.0);
}

double renyi_gaussian_1d(double mu_p, double mu_q, double sigma, double alpha) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
  const double diff = mu_p - mu_q;
  return diff * diff / (2.0 * sigma * sigma);
}

double ic_dirac_mixture(double x, double c, double lipschitz, double alpha) {
  check_alpha(alpha);
  if (!(x > 0.0)) throw std::domain_error("x must be positive");
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("c must lie in (0,1)");
  if (!(lipschitz > 0.0)) throw std::domain_error("Lipschitz bound must be positive");
  const double alx = alpha * lipschitz * x;
  if (alx < 1.0) return (1.0 - c) * lipschitz * x;
  if (alx <= 1.0 / c) return 1.0 / alpha - c * lipschitz * x + std::log(alx) / alpha;
  return std::log(1.0 / c) / alpha;
}

double ic_two_diracs(double x, double lipschitz, double alpha) {
  check_alpha(alpha);
  if (!(x > 0.0)) throw std::domain_error("x must be positive");
  if (!(lipschitz > 0.0)) throw std::domain_error("Lipschitz bound must be positive");
  if (x >= 1.0 / (alpha * lipschitz)) return std::log(alpha * lipschitz * x) / alpha + 1.0 / alpha;
  return lipschitz * x;
}

double ic_wcr_dirac_mixture(double x, double c) {
  if (!(x > 0.0)) throw std::domain_error("x must be positive");
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("c must lie in (0,1)");
  if (x < 1.0) return (1.0 - c) * x;
  if (x <= 1.0 / c) return 1.0 - c * x + std::log(x);
  return std::log(1.0 / c);
}

DvCounterexample dv_counterexample_pair(double x, double c, double lipschitz, double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw std::domain_error("DV counterexample requires alpha > 1");
  if (!(x > 0.0) || !(lipschitz > 0.0)) throw std::domain_error("x and L must be positive");
  if (!(c > 0.0 && c < 1.0)) throw std::domain_error("c must lie in (0,1)");
  const double lx = lipschitz * x;
  // log(c + (1-c) e^{(alpha-1) L x}) written to stay finite for large exponents.
  const double t = (alpha - 1.0) * lx;
  const double log_sum = t + std::log((1.0 - c) + c * std::exp(-t));
  return {log_sum / (alpha - 1.0), (1.0 - c) * lx};
}

}  // namespace icrenyi
