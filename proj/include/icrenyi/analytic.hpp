#pragma once

// Exact divergence values on finite alphabets and closed-form values for the
// Dirac-mixture examples. Everything in the oracle and estimator layers is
// checked against these.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "icrenyi/extended_real.hpp"

namespace icrenyi {

/// Probability vector over points of a MetricSpace.
class FiniteDistribution {
 public:
  /// Weights on points 0..n-1. Throws std::invalid_argument unless every
  /// weight is >= 0 and the total is 1 within 1e-12.
  explicit FiniteDistribution(std::vector<double> weights);
  FiniteDistribution(std::vector<double> weights, std::vector<std::size_t> support_ids);

  /// Point mass at index i of an n-point space.
  static FiniteDistribution dirac(std::size_t n, std::size_t i);

  [[nodiscard]] std::size_t size() const { return weights_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::span<const std::size_t> support_ids() const { return support_ids_; }

  [[nodiscard]] bool same_support(const FiniteDistribution& other) const {
    return support_ids_ == other.support_ids_;
  }

 private:
  std::vector<double> weights_;
  std::vector<std::size_t> support_ids_;
};

/// Finite metric space given by its distance matrix (row-major, n x n).
class MetricSpace {
 public:
  /// Throws std::invalid_argument if the matrix is not a metric
  /// (symmetry, zero diagonal, nonnegativity, triangle inequality).
  MetricSpace(std::size_t n, std::vector<double> distances);

  /// Points on the real line.
  static MetricSpace line(std::span<const double> coordinates);

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  [[nodiscard]] double diameter() const;

 private:
  std::size_t n_;
  std::vector<double> d_;
};

/// Renyi divergence with the 1/(alpha(alpha-1)) normalization.
/// Terms with p_i = 0 contribute nothing; +inf when alpha > 1 and P is not
/// absolutely continuous w.r.t. Q (or, for alpha < 1, when P and Q are
/// mutually singular). Throws std::domain_error for alpha <= 0 or alpha == 1.
ExtendedReal renyi_finite(const FiniteDistribution& p, const FiniteDistribution& q, double alpha);

/// Worst-case regret log max_{p_i > 0} p_i / q_i.
ExtendedReal wcr_finite(const FiniteDistribution& p, const FiniteDistribution& q);

/// Renyi divergence between N(mu_p, sigma^2) and N(mu_q, sigma^2). With this
/// normalization the value does not depend on alpha.
double renyi_gaussian_1d(double mu_p, double mu_q, double sigma, double alpha);

/// IC divergence between delta_0 and c delta_0 + (1 - c) delta_x for the
/// L-Lipschitz class on the real line.
double ic_dirac_mixture(double x, double c, double lipschitz, double alpha);

/// IC divergence between delta_0 and delta_x for the L-Lipschitz class.
double ic_two_diracs(double x, double lipschitz, double alpha);

/// Alpha -> infinity limit of alpha * IC with class Lip^1 / alpha between
/// delta_0 and c delta_0 + (1 - c) delta_x.
double ic_wcr_dirac_mixture(double x, double c);

struct DvCounterexample {
  double dv_value;   ///< Lipschitz-restricted DV-Renyi value
  double ipm_value;  ///< matching Wasserstein-type IPM
};

/// DV-Renyi with the L-Lipschitz class between c delta_0 + (1 - c) delta_x
/// and delta_0, alongside the IPM it would need to stay below. Requires
/// alpha > 1.
DvCounterexample dv_counterexample_pair(double x, double c, double lipschitz, double alpha);

}  // namespace icrenyi
