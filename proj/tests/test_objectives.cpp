#include <gtest/gtest.h>

#include <cmath>

#include "icrenyi/analytic.hpp"
#include "icrenyi/objectives.hpp"
#include "icrenyi/rng.hpp"

using namespace icrenyi;

namespace {

Eigen::VectorXd negative_vector(Rng& rng, int n, double lo = 0.05, double hi = 3.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = -rng.uniform(lo, hi);
  return v;
}

Eigen::VectorXd random_weights(Rng& rng, int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.05 + rng.uniform();
  return w / w.sum();
}

const std::vector<ObjectiveFamily>& all_families() {
  static const std::vector<ObjectiveFamily> f = {
      ObjectiveFamily::dv_renyi(0.5),    ObjectiveFamily::dv_renyi(3.0),    ObjectiveFamily::cc_renyi(0.4),
      ObjectiveFamily::cc_renyi(2.0),    ObjectiveFamily::cc_wcr(),         ObjectiveFamily::ic_renyi(5.0),
      ObjectiveFamily::ic_rescaled(0.7), ObjectiveFamily::ic_rescaled(8.0), ObjectiveFamily::ic_wcr(),
      ObjectiveFamily::ipm()};
  return f;
}

}  // namespace

TEST(Objectives, FamilyValidation) {
  EXPECT_THROW(ObjectiveFamily::cc_renyi(1.0).validate(), std::invalid_argument);
  EXPECT_THROW(ObjectiveFamily::dv_renyi(-2.0).validate(), std::invalid_argument);
  EXPECT_THROW((ObjectiveFamily{ObjectiveTag::cc_renyi, std::nullopt}).validate(), std::invalid_argument);
  EXPECT_THROW((ObjectiveFamily{ObjectiveTag::ic_wcr, 2.0}).validate(), std::invalid_argument);
  EXPECT_NO_THROW(ObjectiveFamily::ic_wcr().validate());
  EXPECT_EQ(objective_tag_from_string("ic_rescaled"), ObjectiveTag::ic_rescaled);
  EXPECT_THROW(objective_tag_from_string("dv_wcr"), std::invalid_argument);
  EXPECT_TRUE(ObjectiveFamily::ic_renyi(2.0).penalized());
  EXPECT_FALSE(ObjectiveFamily::cc_renyi(2.0).penalized());
  EXPECT_FALSE(ObjectiveFamily::dv_renyi(2.0).negative_class());
}

TEST(Objectives, DvConstantsCancelAndShiftInvariance) {
  Rng rng(1);
  for (double a : {0.3, 2.0, 10.0}) {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(7, 1.7);
    EXPECT_NEAR(dv_renyi_objective(c, Eigen::VectorXd::Constant(5, 1.7), a), 0.0, 1e-12);
    Eigen::VectorXd p(6), q(9);
    for (auto* v : {&p, &q})
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = rng.normal(0.0, 2.0);
    const double base = dv_renyi_objective(p, q, a);
    const Eigen::VectorXd sp = p.array() + 3.25, sq = q.array() + 3.25;
    EXPECT_NEAR(dv_renyi_objective(sp, sq, a), base, 1e-10);
  }
}

TEST(Objectives, DvLargeExponentsStayFinite) {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 400.0);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(4, 300.0, 500.0);
  EXPECT_TRUE(std::isfinite(dv_renyi_objective(p, q, 10.0)));
}

TEST(Objectives, DvAtLogLikelihoodRatioIsRenyi) {
  const FiniteDistribution p({0.2, 0.5, 0.3}), q({0.4, 0.4, 0.2});
  const double a = 3.0;
  Eigen::VectorXd phi(3), wp(3), wq(3);
  for (int i = 0; i < 3; ++i) {
    phi[i] = std::log(p[i] / q[i]);
    wp[i] = p[i];
    wq[i] = q[i];
  }
  const auto v = evaluate_objective(ObjectiveFamily::dv_renyi(a), {phi, phi, wp, wq}, 0.0, false);
  EXPECT_NEAR(v.value, renyi_finite(p, q, a).value(), 1e-12);
}

TEST(Objectives, CcArithmetic) {
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(4, -2.0);
  EXPECT_NEAR(cc_renyi_objective(g, g, 2.0), -2.0 + 0.5 * std::log(2.0) + 0.5 * (std::log(2.0) + 1.0), 1e-14);
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(3, -1.0);
  EXPECT_NEAR(cc_wcr_objective(one, one), 0.0, 1e-15);
  for (double a : {0.5, 2.0, 30.0}) EXPECT_NEAR(ic_rescaled_objective(one, one, a, 0.0), 0.0, 1e-15);
}

TEST(Objectives, CcScaleMap) {
  Rng rng(2);
  for (double a : {0.4, 2.0, 7.0})
    for (double s : {0.1, 0.9, 4.0}) {
      const auto gp = negative_vector(rng, 8), gq = negative_vector(rng, 5);
      const double lhs = cc_renyi_objective(s * gp, s * gq, a) - cc_renyi_objective(gp, gq, a);
      const double rhs = gq.mean() * (s - 1.0) + std::log(s) / a;
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Objectives, PenaltySubtractsAndUnpenalisedMatch) {
  Rng rng(3);
  const auto gp = negative_vector(rng, 6), gq = negative_vector(rng, 6);
  EXPECT_DOUBLE_EQ(ic_renyi_objective(gp, gq, 3.0, 0.0), cc_renyi_objective(gp, gq, 3.0));
  EXPECT_DOUBLE_EQ(ic_wcr_objective(gp, gq, 0.0), cc_wcr_objective(gp, gq));
  EXPECT_NEAR(ic_wcr_objective(gp, gq, 0.25), cc_wcr_objective(gp, gq) - 0.25, 1e-15);
  EXPECT_THROW(evaluate_objective(ObjectiveFamily::cc_wcr(), {gp, gq, {}, {}}, 0.1), std::invalid_argument);
  EXPECT_THROW(ic_wcr_objective(gp, gq, -0.1), std::invalid_argument);
}

TEST(Objectives, RescaledApproachesWcr) {
  Rng rng(4);
  const auto gp = negative_vector(rng, 10), gq = negative_vector(rng, 10);
  const double wcr = ic_wcr_objective(gp, gq, 0.0);
  double prev_gap = INFINITY;
  for (double a : {10.0, 1e3, 1e6}) {
    const double gap = std::abs(ic_rescaled_objective(gp, gq, a, 0.0) - wcr);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-5);
}

TEST(Objectives, NegativityEnforced) {
  Eigen::VectorXd gp = Eigen::VectorXd::Constant(3, -1.0), gq = gp;
  gp[1] = 0.0;
  EXPECT_THROW(cc_renyi_objective(gp, gq, 2.0), ConstraintViolation);
  EXPECT_THROW(ic_wcr_objective(gq, gp, 0.0), ConstraintViolation);
  EXPECT_NO_THROW(dv_renyi_objective(gp, gq, 2.0));
  // A zero-weight entry is outside the support and not checked.
  Eigen::VectorXd w(3);
  w << 0.5, 0.0, 0.5;
  EXPECT_NO_THROW(evaluate_objective(ObjectiveFamily::cc_wcr(), {gp, gq, w, {}}));
}

TEST(Objectives, ClampAndOverflowFlag) {
  Eigen::VectorXd gp(2);
  gp << -1e-30, -1.0;
  const Eigen::VectorXd gq = Eigen::VectorXd::Constant(2, -1.0);
  // alpha < 1 makes the exponent negative; the clamp at 1e-12 bounds the power.
  const auto v = evaluate_objective(ObjectiveFamily::cc_renyi(0.25), {gp, gq, {}, {}});
  EXPECT_TRUE(std::isfinite(v.value));
  EXPECT_TRUE(v.overflow_flag);
  Eigen::VectorXd at_clamp(2);
  at_clamp << -kAbsClamp, -1.0;
  EXPECT_NEAR(v.value, cc_renyi_objective(at_clamp, gq, 0.25), 1e-12);
  EXPECT_FALSE(evaluate_objective(ObjectiveFamily::cc_renyi(0.25), {gq, gq, {}, {}}).overflow_flag);
}

TEST(Objectives, WeightsMatchRepetition) {
  Eigen::VectorXd gp(2), rep(3), w(2);
  gp << -0.5, -2.0;
  rep << -0.5, -2.0, -2.0;
  w << 1.0, 2.0;
  const Eigen::VectorXd gq = Eigen::VectorXd::Constant(1, -1.0);
  for (const auto& fam : all_families()) {
    const auto a = evaluate_objective(fam, {gp, gq, w, {}}, 0.0, false).value;
    const auto b = evaluate_objective(fam, {rep, gq, {}, {}}, 0.0, false).value;
    EXPECT_NEAR(a, b, 1e-13) << fam.name();
  }
}

TEST(Objectives, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  for (const auto& fam : all_families())
    for (bool weighted : {false, true}) {
      const int np = 5, nq = 4;
      BatchOutputs b{negative_vector(rng, np, 0.2, 2.0), negative_vector(rng, nq, 0.2, 2.0), {}, {}};
      if (weighted) {
        b.w_p = random_weights(rng, np);
        b.w_q = random_weights(rng, nq);
      }
      const auto v = evaluate_objective(fam, b);
      const double h = 1e-6;
      for (int side = 0; side < 2; ++side) {
        Eigen::VectorXd& g = side == 0 ? b.g_on_p : b.g_on_q;
        const Eigen::VectorXd& d = side == 0 ? v.d_p : v.d_q;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          const double keep = g[i];
          g[i] = keep + h;
          const double up = evaluate_objective(fam, b, 0.0, false).value;
          g[i] = keep - h;
          const double dn = evaluate_objective(fam, b, 0.0, false).value;
          g[i] = keep;
          EXPECT_NEAR(d[i], (up - dn) / (2 * h), 1e-6) << fam.name() << " side " << side;
        }
      }
    }
}

TEST(Objectives, LogMeanExp) {
  Eigen::VectorXd x(3);
  x << 1000.0, 1000.0, -1e300;
  EXPECT_NEAR(log_mean_exp(x), 1000.0 + std::log(2.0 / 3.0), 1e-12);
  Eigen::VectorXd w(3);
  w << 1.0, 1.0, 0.0;
  EXPECT_NEAR(log_mean_exp(x, w), 1000.0, 1e-12);
  EXPECT_THROW(log_mean_exp(Eigen::VectorXd()), std::invalid_argument);
}

// Every objective is a supremum representation, so no feasible test
// function may exceed the exact divergence.
TEST(Objectives, LowerBoundOnFiniteAlphabets) {
  Rng rng(6);
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 2 + static_cast<int>(rng.index(4));
    const auto wp = random_weights(rng, n), wq = random_weights(rng, n);
    const FiniteDistribution p(std::vector<double>(wp.data(), wp.data() + n));
    const FiniteDistribution q(std::vector<double>(wq.data(), wq.data() + n));
    for (double a : {0.5, 2.0, 6.0}) {
      const double ren = renyi_finite(p, q, a).value();
      for (int k = 0; k < 500; ++k) {
        const auto g = negative_vector(rng, n, 1e-3, 5.0);
        Eigen::VectorXd phi(n);
        for (int i = 0; i < n; ++i) phi[i] = rng.normal(0.0, 3.0);
        EXPECT_LE(evaluate_objective(ObjectiveFamily::cc_renyi(a), {g, g, wp, wq}, 0.0, false).value, ren + 1e-9);
        EXPECT_LE(evaluate_objective(ObjectiveFamily::dv_renyi(a), {phi, phi, wp, wq}, 0.0, false).value,
                  ren + 1e-9);
      }
    }
    const double wcr = wcr_finite(p, q).value();
    for (int k = 0; k < 500; ++k) {
      const auto g = negative_vector(rng, n, 1e-3, 5.0);
      EXPECT_LE(evaluate_objective(ObjectiveFamily::cc_wcr(), {g, g, wp, wq}, 0.0, false).value, wcr + 1e-9);
    }
  }
}
