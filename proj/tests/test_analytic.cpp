#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "icrenyi/analytic.hpp"
#include "icrenyi/rng.hpp"

using namespace icrenyi;

namespace {

FiniteDistribution random_distribution(Rng& rng, std::size_t n, double floor = 0.0) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = floor + rng.uniform();
    total += x;
  }
  for (auto& x : w) x /= total;
  // Push the rounding residue into the largest entry so the sum is exact to ~1 ulp.
  double s = 0.0;
  for (std::size_t i = 1; i < n; ++i) s += w[i];
  w[0] = 1.0 - s;
  return FiniteDistribution(w);
}

// Simpson quadrature of p^alpha q^(1-alpha) for equal-variance Gaussians; an
// independent route to the closed form.
double gaussian_renyi_by_quadrature(double mu_p, double mu_q, double sigma, double alpha) {
  const double lo = std::min(mu_p, mu_q) - 40.0 * sigma;
  const double hi = std::max(mu_p, mu_q) + 40.0 * sigma;
  const int n = 200000;
  const double h = (hi - lo) / n;
  auto density = [sigma](double x, double mu) {
    return std::exp(-(x - mu) * (x - mu) / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * std::numbers::pi));
  };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double p = density(x, mu_p);
    const double q = density(x, mu_q);
    if (p > 0 && q > 0) sum += w * std::exp(alpha * std::log(p) + (1 - alpha) * std::log(q));
  }
  return std::log(sum * h / 3.0) / (alpha * (alpha - 1.0));
}

}  // namespace

TEST(FiniteDistribution, RejectsInvalidWeights) {
  EXPECT_THROW(FiniteDistribution({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({-0.1, 1.1}), std::invalid_argument);
  EXPECT_NO_THROW(FiniteDistribution({0.25, 0.75}));
}

TEST(MetricSpace, RejectsNonMetrics) {
  EXPECT_THROW(MetricSpace(2, {0, 1, 2, 0}), std::invalid_argument);
  EXPECT_THROW(MetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}), std::invalid_argument);
  const double pts[] = {0.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(MetricSpace::line(pts).diameter(), 2.0);
}

TEST(RenyiFinite, Examples) {
  const FiniteDistribution u({0.5, 0.5});
  EXPECT_EQ(renyi_finite(u, u, 2.0).value(), 0.0);
  // Hand summation: (1/2) log(0.25/0.9 + 0.25/0.1).
  const FiniteDistribution q({0.9, 0.1});
  EXPECT_NEAR(renyi_finite(u, q, 2.0).value(), 0.5 * std::log(0.25 / 0.9 + 0.25 / 0.1), 1e-14);
  EXPECT_NEAR(renyi_finite(u, q, 2.0).value(), 0.51083, 1e-5);
  for (double alpha : {0.3, 2.0, 7.0}) {
    const double c = 0.3;
    EXPECT_NEAR(renyi_finite(FiniteDistribution({1.0, 0.0}), FiniteDistribution({c, 1 - c}), alpha).value(),
                std::log(1.0 / c) / alpha, 1e-13);
  }
}

TEST(RenyiFinite, DomainAndInfinity) {
  const FiniteDistribution p({1.0, 0.0});
  const FiniteDistribution q({0.0, 1.0});
  EXPECT_THROW(renyi_finite(p, q, 1.0), std::domain_error);
  EXPECT_THROW(renyi_finite(p, q, 0.0), std::domain_error);
  EXPECT_TRUE(renyi_finite(p, q, 2.0).is_infinite());
  EXPECT_TRUE(renyi_finite(FiniteDistribution({0.5, 0.5}), q, 3.0).is_infinite());
  // alpha < 1 only needs overlapping supports.
  EXPECT_TRUE(renyi_finite(FiniteDistribution({0.5, 0.5}), q, 0.5).is_finite());
}

TEST(RenyiFinite, NonnegativeAndZeroOnlyOnDiagonal) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 2 + rng.index(5);
    const auto p = random_distribution(rng, n);
    const auto q = random_distribution(rng, n);
    for (double alpha : {0.25, 0.5, 1.5, 3.0}) {
      EXPECT_GT(renyi_finite(p, q, alpha).value(), 0.0);
      EXPECT_NEAR(renyi_finite(p, p, alpha).value(), 0.0, 1e-14);
    }
  }
}

TEST(RenyiFinite, ReflectionIdentityBelowOne) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_distribution(rng, 4);
    const auto q = random_distribution(rng, 4);
    for (double alpha : {0.1, 0.4, 0.7}) {
      EXPECT_NEAR(renyi_finite(p, q, alpha).value(), renyi_finite(q, p, 1 - alpha).value(), 1e-12);
    }
  }
}

TEST(RenyiFinite, RescaledIsNonDecreasingInAlpha) {
  Rng rng(13);
  const double ladder[] = {0.1, 0.3, 0.6, 0.9, 1.2, 2.0, 4.0, 10.0, 50.0};
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_distribution(rng, 3 + rng.index(3));
    const auto q = random_distribution(rng, p.size());
    double prev = 0.0;
    for (double alpha : ladder) {
      const double d = alpha * renyi_finite(p, q, alpha).value();
      EXPECT_GE(d, prev - 1e-12);
      prev = d;
    }
  }
}

TEST(WcrFinite, Examples) {
  const FiniteDistribution u({0.5, 0.5});
  EXPECT_EQ(wcr_finite(u, u).value(), 0.0);
  EXPECT_NEAR(wcr_finite(u, FiniteDistribution({0.9, 0.1})).value(), std::log(5.0), 1e-14);
  EXPECT_TRUE(wcr_finite(FiniteDistribution({1.0, 0.0}), FiniteDistribution({0.0, 1.0})).is_infinite());
}

TEST(WcrFinite, IsLimitOfRescaledRenyi) {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    // Full-support instances with ratios bounded away from degenerate.
    const auto p = random_distribution(rng, 4, 0.2);
    const auto q = random_distribution(rng, 4, 0.2);
    const double wcr = wcr_finite(p, q).value();
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double alpha : {10.0, 100.0, 1000.0}) {
      const double gap = wcr - alpha * renyi_finite(p, q, alpha).value();
      EXPECT_GE(gap, -1e-12);
      EXPECT_LE(gap, prev_gap + 1e-12);
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-2);
  }
}

TEST(RenyiGaussian, MatchesQuadrature) {
  EXPECT_EQ(renyi_gaussian_1d(1.3, 1.3, 2.0, 3.0), 0.0);
  EXPECT_NEAR(gaussian_renyi_by_quadrature(0, 1, 1, 2), 0.5, 1e-9);
  EXPECT_NEAR(gaussian_renyi_by_quadrature(0, 3, 1, 10), 4.5, 1e-7);
  EXPECT_DOUBLE_EQ(renyi_gaussian_1d(0, 1, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(renyi_gaussian_1d(0, 3, 1, 10), 4.5);
  for (double alpha : {0.5, 2.5, 6.0})
    EXPECT_NEAR(renyi_gaussian_1d(0.2, -0.7, 1.5, alpha), gaussian_renyi_by_quadrature(0.2, -0.7, 1.5, alpha), 1e-8);
  EXPECT_THROW(renyi_gaussian_1d(0, 1, 0.0, 2), std::domain_error);
}

TEST(IcDiracMixture, Branches) {
  // alpha L x = 0.5, c = 0.5: first branch (1-c) L x.
  EXPECT_DOUBLE_EQ(ic_dirac_mixture(0.25, 0.5, 1.0, 2.0), 0.5 * 0.25);
  // x=1, c=0.2, L=1, alpha=2.
  EXPECT_NEAR(ic_dirac_mixture(1.0, 0.2, 1.0, 2.0), 0.5 - 0.2 + 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(ic_dirac_mixture(1.0, 0.2, 1.0, 2.0), 0.64657, 1e-5);
  // Boundary alpha L x = 1/c: middle and last branches agree.
  const double c = 0.25, alpha = 2.0, l = 1.0, x = 1.0 / (c * alpha * l);
  const double middle = 1 / alpha - c * l * x + std::log(alpha * l * x) / alpha;
  EXPECT_NEAR(ic_dirac_mixture(x, c, l, alpha), std::log(1 / c) / alpha, 1e-14);
  EXPECT_NEAR(middle, std::log(1 / c) / alpha, 1e-14);
  // Boundary alpha L x = 1: first and middle branches agree.
  EXPECT_NEAR(ic_dirac_mixture(0.5, c, 1.0, 2.0), (1 - c) * 0.5, 1e-14);
  EXPECT_THROW(ic_dirac_mixture(1.0, 1.0, 1.0, 2.0), std::domain_error);
  EXPECT_THROW(ic_dirac_mixture(-1.0, 0.5, 1.0, 2.0), std::domain_error);
  EXPECT_THROW(ic_dirac_mixture(1.0, 0.5, 0.0, 2.0), std::domain_error);
}

TEST(IcDiracMixture, BoundedByRenyiAndIpm) {
  Rng rng(15);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = rng.uniform(0.01, 5.0), c = rng.uniform(0.01, 0.99), l = rng.uniform(0.05, 5.0);
    const double alpha = rng.uniform() < 0.5 ? rng.uniform(0.05, 0.95) : rng.uniform(1.05, 20.0);
    const double v = ic_dirac_mixture(x, c, l, alpha);
    EXPECT_LE(v, std::min(std::log(1 / c) / alpha, (1 - c) * l * x) + 1e-12);
    EXPECT_GE(v, 0.0);
  }
}

TEST(IcDiracMixture, InterpolationLimits) {
  const double x = 1.3, c = 0.4, alpha = 3.0;
  EXPECT_NEAR(ic_dirac_mixture(x, c, 1e6, alpha), std::log(1 / c) / alpha, 1e-12);
  for (double l : {1e-2, 1e-4, 1e-6}) EXPECT_NEAR(ic_dirac_mixture(x, c, l, alpha) / l, (1 - c) * x, 1e-12);
}

TEST(IcTwoDiracs, BranchesAndLimits) {
  const double alpha = 2.0, l = 1.5;
  EXPECT_DOUBLE_EQ(ic_two_diracs(0.1, l, alpha), l * 0.1);
  EXPECT_NEAR(ic_two_diracs(1.0 / (alpha * l), l, alpha), 1.0 / alpha, 1e-15);
  EXPECT_NEAR(ic_two_diracs(1e-9, l, alpha), 0.0, 1e-8);
  EXPECT_LE(ic_two_diracs(3.0, l, alpha), l * 3.0);
}

// Lipschitz-restricted log-DV between delta_0 and delta_x: the objective
// log(a/b)/alpha over positive L-Lipschitz functions is unbounded as b -> 0+,
// while the IC value stays finite and vanishes as x -> 0+.
TEST(LogDvCounterexample, Diverges) {
  const double x = 0.5, l = 1.0, alpha = 2.0;
  double prev = 0.0;
  for (double b : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double a = b + l * x;  // largest admissible phi(0) given phi(x) = b
    const double objective = std::log(a / b) / alpha;
    EXPECT_GT(objective, prev);
    prev = objective;
  }
  EXPECT_GT(prev, 9.0);
  EXPECT_LT(ic_two_diracs(x, l, alpha), l * x + 1e-15);
}

TEST(DvCounterexample, ExceedsIpm) {
  {
    const auto r = dv_counterexample_pair(1.0, 0.5, 1.0, 2.0);
    EXPECT_NEAR(r.dv_value, std::log(0.5 + 0.5 * std::exp(1.0)), 1e-14);
    EXPECT_NEAR(r.dv_value, 0.620115, 1e-6);
    EXPECT_DOUBLE_EQ(r.ipm_value, 0.5);
    EXPECT_GT(r.dv_value, r.ipm_value);
  }
  {
    const auto r = dv_counterexample_pair(2.0, 0.9, 1.0, 3.0);
    EXPECT_NEAR(r.dv_value, 0.5 * std::log(0.9 + 0.1 * std::exp(4.0)), 1e-14);
    EXPECT_NEAR(r.ipm_value, 0.2, 1e-15);
    EXPECT_GT(r.dv_value, r.ipm_value);
  }
  const auto near_one = dv_counterexample_pair(1.0, 1.0 - 1e-9, 1.0, 2.0);
  EXPECT_NEAR(near_one.dv_value, 0.0, 1e-8);
  EXPECT_NEAR(near_one.ipm_value, 0.0, 1e-8);
  EXPECT_THROW(dv_counterexample_pair(1.0, 0.5, 1.0, 1.0), std::domain_error);
  EXPECT_THROW(dv_counterexample_pair(1.0, 0.5, 1.0, 0.5), std::domain_error);
  // Large exponents stay finite.
  EXPECT_TRUE(std::isfinite(dv_counterexample_pair(100.0, 0.5, 1.0, 50.0).dv_value));
}
