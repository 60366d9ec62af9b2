// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Criteria can be selected by number:
//   acceptance 1 6 11

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icrenyi/analytic.hpp"
#include "icrenyi/estimator.hpp"
#include "icrenyi/experiments/auc.hpp"
#include "icrenyi/experiments/auc_detection.hpp"
#include "icrenyi/experiments/oracle_suite.hpp"
#include "icrenyi/experiments/toy_gan.hpp"
#include "icrenyi/experiments/variance_study.hpp"
#include "icrenyi/mlp.hpp"
#include "icrenyi/objectives.hpp"
#include "icrenyi/penalty.hpp"
#include "icrenyi/rng.hpp"

using namespace icrenyi;
using namespace icrenyi::experiments;

namespace {

// Fixed by the validation run documented in the README (AUC 1.00 over
// 20 + 20 runs at rho = 0.1 with a seed stream disjoint from this one).
constexpr double kAucThreshold = 0.95;

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Outcome from_check(const CheckResult& c) {
  return {c.passed, "worst " + fmt(c.worst) + " (tol " + fmt(c.tolerance) + "), " + std::to_string(c.failures) + "/" +
                        std::to_string(c.cases) + " failing" + (c.passed ? "" : "; " + c.detail)};
}

Outcome duality() {
  const auto c = check_duality({});
  Outcome o = from_check(c);
  o.passed = o.passed && c.seconds < 120.0;
  o.detail += ", " + fmt(c.seconds) + " s";
  return o;
}

Outcome closed_forms() { return from_check(check_closed_forms({})); }
Outcome bound() { return from_check(check_bound({})); }
Outcome monotonicity() { return from_check(check_monotonicity({})); }
Outcome data_processing() { return from_check(check_data_processing({})); }
Outcome lower_bound() { return from_check(check_lower_bound({})); }

Eigen::MatrixXd normal_batch(Rng& rng, int dim, int n, double mean = 0.0) {
  Eigen::MatrixXd x(dim, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(mean, 1.0);
  return x;
}

Outcome gradients() {
  Rng rng(606);
  const std::vector<FinalLayer> finals{FinalLayer::identity, FinalLayer::neg_abs, FinalLayer::poly_softplus};
  const std::vector<ObjectiveFamily> signed_families{ObjectiveFamily::dv_renyi(3.0), ObjectiveFamily::ipm()};
  const std::vector<ObjectiveFamily> negative_families{
      ObjectiveFamily::cc_renyi(2.0), ObjectiveFamily::ic_renyi(0.5), ObjectiveFamily::ic_rescaled(5.0),
      ObjectiveFamily::ic_wcr(), ObjectiveFamily::cc_wcr()};
  double worst = 0.0;
  int failures = 0;
  for (int net = 0; net < 100; ++net) {
    const FinalLayer fl = finals[static_cast<std::size_t>(net) % finals.size()];
    std::vector<int> shape{1 + static_cast<int>(rng.index(3))};
    const int depth = 1 + static_cast<int>(rng.index(3));
    for (int l = 0; l < depth; ++l) shape.push_back(2 + static_cast<int>(rng.index(9)));
    shape.push_back(1);
    Mlp f(shape, fl, rng.bits());
    // Nonzero biases keep units off the ReLU kink where differences are meaningless.
    for (auto& layer : f.params())
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-0.3, 0.3);
    const auto& pool = fl == FinalLayer::identity ? signed_families : negative_families;
    const ObjectiveFamily family = pool[rng.index(pool.size())];
    const Eigen::MatrixXd p = normal_batch(rng, shape[0], 12), q = normal_batch(rng, shape[0], 12, 0.7);
    const std::uint64_t pen_seed = rng.bits();
    const PenaltySpec spec;

    auto value = [&](const Mlp& m, Parameters* grads) {
      Rng pr(pen_seed);
      const double pen = family.penalized() ? penalty(m, p, q, spec, pr, grads, -1.0) : 0.0;
      Tape tp, tq;
      const auto obj = evaluate_objective(
          family, {m.forward(p, tp).row(0).transpose(), m.forward(q, tq).row(0).transpose(), {}, {}}, pen, grads != nullptr);
      if (grads) {
        m.backward(tp, obj.d_p.transpose(), grads, nullptr);
        m.backward(tq, obj.d_q.transpose(), grads, nullptr);
      }
      return obj.value;
    };

    Parameters grads = zeros_like(f.params());
    value(f, &grads);
    const Eigen::VectorXd analytic = flatten(grads);
    const Eigen::VectorXd theta = flatten(f.params());
    Eigen::VectorXd numeric(theta.size());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd t = theta;
      t[i] += h;
      unflatten(f.params(), t);
      const double up = value(f, nullptr);
      t[i] -= 2 * h;
      unflatten(f.params(), t);
      numeric[i] = (up - value(f, nullptr)) / (2 * h);
    }
    unflatten(f.params(), theta);
    const double err = (analytic - numeric).cwiseAbs().maxCoeff() / std::max(1.0, numeric.cwiseAbs().maxCoeff());
    worst = std::max(worst, err);
    if (!(err <= 1e-4)) ++failures;
  }
  // One-sided derivatives of the poly-softplus layer at its branch point.
  const double e = 1e-7;
  const double left = (apply_final(FinalLayer::poly_softplus, 0.0) - apply_final(FinalLayer::poly_softplus, -e)) / e;
  const double right = (apply_final(FinalLayer::poly_softplus, e) - apply_final(FinalLayer::poly_softplus, 0.0)) / e;
  const double analytic_gap =
      std::abs(final_derivative(FinalLayer::poly_softplus, -1e-300) - final_derivative(FinalLayer::poly_softplus, 0.0));
  const double kink = std::max(std::abs(left - right), analytic_gap);
  return {failures == 0 && kink <= 1e-6, "100 nets, worst relative error " + fmt(worst) + ", " +
                                             std::to_string(failures) + " over 1e-4; branch-point derivative gap " +
                                             fmt(kink)};
}

VarianceStudyConfig gaussian_config() {
  VarianceStudyConfig cfg;  // one 64-unit layer, minibatch 500, 10000 epochs, n = 10000
  cfg.replicates = 50;
  cfg.train.seed = 7000;
  return cfg;
}

Outcome gaussian_estimation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = gaussian_config();
  const double exact = renyi_gaussian_1d(cfg.mu_p, 1.0, cfg.sigma, 2.0);
  const auto s = variance_cell(cfg, ObjectiveFamily::cc_renyi(2.0), 1.0, exact);
  int inside = 0;
  for (const auto& r : s.runs)
    if (r.estimate && std::abs(*r.estimate - 0.5) <= 0.1) ++inside;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {inside >= 45, std::to_string(inside) + "/50 runs in 0.5 +- 0.1 (mean " + fmt(s.mean) + ", exact " +
                            fmt(exact) + "), " + fmt(secs) + " s"};
}

Outcome variance_ordering() {
  auto cfg = gaussian_config();
  cfg.train.seed = 8000;
  const double exact = renyi_gaussian_1d(cfg.mu_p, 3.0, cfg.sigma, 10.0);
  auto summary = [&](ObjectiveFamily f, FinalLayer fl) {
    auto c = cfg;
    c.net.final_layer = fl;
    try {
      return variance_cell(c, f, 3.0, exact);
    } catch (const AllRunsFailed&) {
      ReplicateSummary s;
      s.n_runs = s.n_failed = cfg.replicates;
      s.failure_rate = 1.0;
      s.mean = s.variance = s.mse = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
  };
  const auto cc = summary(ObjectiveFamily::cc_renyi(10.0), FinalLayer::poly_softplus);
  const auto dv = summary(ObjectiveFamily::dv_renyi(10.0), FinalLayer::identity);
  const auto cc_abs = summary(ObjectiveFamily::cc_renyi(10.0), FinalLayer::neg_abs);
  // A family whose every run fails has no variance; that counts against it.
  auto less = [](double a, double b) { return std::isnan(b) ? !std::isnan(a) : a < b; };
  const bool ok = less(cc.variance, dv.variance) && less(cc.mse, dv.mse) && cc.failure_rate <= cc_abs.failure_rate;
  return {ok, "exact " + fmt(exact) + "; CC var " + fmt(cc.variance) + " mse " + fmt(cc.mse) + " fail " +
                  fmt(cc.failure_rate) + "; DV var " + fmt(dv.variance) + " mse " + fmt(dv.mse) + " fail " +
                  fmt(dv.failure_rate) + "; CC neg_abs fail " + fmt(cc_abs.failure_rate)};
}

Outcome auc_harness() {
  Rng rng(909);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> pos(1 + rng.index(50)), neg(1 + rng.index(50));
    for (auto& x : pos) x = static_cast<double>(rng.index(8));
    for (auto& x : neg) x = static_cast<double>(rng.index(8)) - 1.0;
    double wins = 0.0;
    for (double a : pos)
      for (double b : neg) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    if (auc_rank(pos, neg) != wins / static_cast<double>(pos.size() * neg.size())) ++mismatches;
  }
  AucDetectionConfig cfg;  // ic_wcr, n = 20000, 20 + 20 runs
  cfg.rho = {0.0, 0.1};
  const auto rows = auc_detection(cfg);
  const double null_auc = rows.at(0).auc, signal_auc = rows.at(1).auc;
  const bool ok = mismatches == 0 && null_auc >= 0.35 && null_auc <= 0.65 && signal_auc >= kAucThreshold;
  return {ok, std::to_string(mismatches) + "/500 pairwise mismatches; rho=0 AUC " + fmt(null_auc) +
                  "; rho=0.1 AUC " + fmt(signal_auc) + " (threshold " + fmt(kAucThreshold) + ")"};
}

Outcome toy_gan_runs() {
  GanConfig base;  // gaussian_ring_8, 5 critic steps, batch 128
  base.generator_steps = 20000;
  base.stop_at_coverage = 7;
  std::ostringstream detail;
  bool ok = true;
  for (const auto& family : {ObjectiveFamily::ipm(), ObjectiveFamily::ic_wcr()}) {
    int reached = 0;
    detail << (family.tag == ObjectiveTag::ipm ? "wasserstein_gp" : family.name()) << " reached 7/8 at steps [";
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto c = base;
      c.family = family;
      c.seed = seed;
      const auto r = train_gan(c);
      if (r.first_full_coverage_step && !r.nan_failure) ++reached;
      detail << (seed ? " " : "") << (r.first_full_coverage_step ? std::to_string(*r.first_full_coverage_step) : "-");
    }
    detail << "] " << reached << "/5; ";
    ok = ok && reached >= 3;
  }
  for (double alpha : {2.0, 10.0}) {
    int clean = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto c = base;
      c.family = ObjectiveFamily::ic_rescaled(alpha);
      c.seed = seed;
      c.generator_steps = 3000;
      c.stop_at_coverage.reset();
      const auto r = train_gan(c);
      if (!r.nan_failure && r.steps_completed == c.generator_steps) ++clean;
    }
    detail << "ic_rescaled(" << fmt(alpha) << ") " << clean << "/3 clean" << (alpha < 10.0 ? "; " : "");
    ok = ok && clean == 3;
  }
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle duality on random two/three-point spaces", duality},
      {"Dirac-mixture closed forms and large-alpha limit", closed_forms},
      {"IC bounded by min(Renyi, IPM); unconstrained class gives Renyi", bound},
      {"alpha * IC(Gamma/alpha) non-decreasing in alpha", monotonicity},
      {"data processing inequality and identity kernels", data_processing},
      {"reverse-mode gradients vs central differences", gradients},
      {"Gaussian R_2 estimate with cc_renyi", gaussian_estimation},
      {"variance and MSE ordering at alpha=10, mu_q=3", variance_ordering},
      {"AUC harness and synthetic detection", auc_harness},
      {"toy GAN coverage and stability", toy_gan_runs},
      {"objectives never exceed the exact divergence", lower_bound}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("%s criterion %2d: %s | %s\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
