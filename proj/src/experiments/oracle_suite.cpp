#include "icrenyi/experiments/oracle_suite.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "icrenyi/analytic.hpp"
#include "icrenyi/experiments/output.hpp"
#include "icrenyi/experiments/parallel.hpp"
#include "icrenyi/objectives.hpp"
#include "icrenyi/oracle.hpp"
#include "icrenyi/rng.hpp"

namespace icrenyi::experiments {

namespace {

FiniteDistribution random_distribution(Rng& rng, std::size_t n, double floor = 0.05) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = floor + rng.uniform());
  for (auto& x : w) x /= total;
  double rest = 0.0;
  for (std::size_t i = 1; i < n; ++i) rest += w[i];
  w[0] = 1.0 - rest;
  return FiniteDistribution(w);
}

// Euclidean distances between random points of the plane.
MetricSpace random_space(Rng& rng, std::size_t n) {
  std::vector<std::array<double, 2>> pts(n);
  for (auto& p : pts) p = {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  return MetricSpace(n, d);
}

MetricSpace two_point(double x) {
  const double pts[] = {0.0, x};
  return MetricSpace::line(pts);
}

template <class T, std::size_t N>
T pick(Rng& rng, const std::array<T, N>& xs) {
  return xs[rng.index(N)];
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class Tally {
 public:
  Tally(CheckResult& r, double tol) : r_(r) { r_.tolerance = tol; }
  // error is a nonnegative discrepancy (or a signed violation; negative is fine).
  void record(double error, const std::string& what) {
    ++r_.cases;
    if (std::isnan(error)) error = std::numeric_limits<double>::infinity();
    r_.worst = std::max(r_.worst, error);
    if (error > r_.tolerance) {
      if (r_.failures == 0) r_.detail = what + ": error " + fmt(error);
      ++r_.failures;
    }
  }
  void record(double error, double tol, const std::string& what) {
    const double saved = r_.tolerance;
    r_.tolerance = tol;
    record(error, what);
    r_.tolerance = saved;
  }

 private:
  CheckResult& r_;
};

struct Timer {
  CheckResult& r;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  explicit Timer(CheckResult& res) : r(res) {}
  ~Timer() {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.passed = r.failures == 0 && r.cases > 0;
    if (r.passed) r.detail = std::to_string(r.cases) + " cases";
  }
};

// A random member of the class {g : g_i - g_j <= C_ij} that is strictly
// negative. McShane's construction min_j (y_j + C_ij) stays in the class.
Eigen::VectorXd feasible_vector(Rng& rng, const Eigen::MatrixXd& bounds, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = (y.array() + bounds.row(i).transpose().array()).minCoeff();
  const double gap = std::exp(rng.uniform(std::log(1e-6), std::log(10.0)));
  return g.array() - (g.maxCoeff() + gap);
}

Eigen::MatrixXd class_bounds(const FunctionClassSpec& gamma, const MetricSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      c(i, j) = i == j ? 0.0 : gamma.difference_bound(space(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  return c;
}

Eigen::VectorXd as_vector(const FiniteDistribution& d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) v[static_cast<Eigen::Index>(i)] = d[i];
  return v;
}

}  // namespace

OracleSuiteConfig OracleSuiteConfig::from_json(const json& j) {
  OracleSuiteConfig c;
  KeyReader r(j, "oracle_suite");
  if (r.has("experiment") && r.required<std::string>("experiment") != "oracle_suite")
    throw ConfigError("oracle_suite: experiment must be oracle_suite");
  c.seed = r.get("seed", c.seed);
  c.duality_instances = r.get("duality_instances", c.duality_instances);
  c.bound_instances = r.get("bound_instances", c.bound_instances);
  c.monotonicity_instances = r.get("monotonicity_instances", c.monotonicity_instances);
  c.data_processing_kernels = r.get("data_processing_kernels", c.data_processing_kernels);
  c.lower_bound_instances = r.get("lower_bound_instances", c.lower_bound_instances);
  c.lower_bound_probes = r.get("lower_bound_probes", c.lower_bound_probes);
  c.checks = r.get("checks", c.checks);
  c.closed_form_perturbation = r.get("closed_form_perturbation", c.closed_form_perturbation);
  r.finish();
  c.validate();
  return c;
}

json OracleSuiteConfig::to_json() const {
  return {{"experiment", "oracle_suite"},
          {"seed", seed},
          {"duality_instances", duality_instances},
          {"bound_instances", bound_instances},
          {"monotonicity_instances", monotonicity_instances},
          {"data_processing_kernels", data_processing_kernels},
          {"lower_bound_instances", lower_bound_instances},
          {"lower_bound_probes", lower_bound_probes},
          {"checks", checks},
          {"closed_form_perturbation", closed_form_perturbation}};
}

void OracleSuiteConfig::validate() const {
  for (int n : {duality_instances, bound_instances, monotonicity_instances, data_processing_kernels,
                lower_bound_instances, lower_bound_probes})
    if (n < 1) throw ConfigError("oracle_suite: instance and probe counts must be >= 1");
  const auto& names = oracle_check_names();
  for (const auto& c : checks)
    if (std::find(names.begin(), names.end(), c) == names.end())
      throw ConfigError("oracle_suite.checks: unknown check '" + c + "'");
  if (!std::isfinite(closed_form_perturbation)) throw ConfigError("oracle_suite.closed_form_perturbation must be finite");
}

CheckResult check_duality(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "duality";
  Timer timer(r);
  Tally t(r, 1e-3);
  Rng rng(cfg.seed ^ 0x1);
  for (int k = 0; k < cfg.duality_instances; ++k) {
    const std::size_t n = 2 + rng.index(2);
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n);
    const auto space = random_space(rng, n);
    const double alpha = pick(rng, std::array{0.5, 2.0, 5.0});
    const auto gamma = FunctionClassSpec::lipschitz(pick(rng, std::array{0.5, 1.0, 2.0}));
    const double primal = ic_primal_bruteforce(p, q, alpha, gamma, space).value.value();
    const double dual = ic_dual_bruteforce(p, q, alpha, gamma, space).value.value();
    t.record(std::abs(primal - dual), "instance " + std::to_string(k) + " (n=" + std::to_string(n) +
                                          ", alpha=" + fmt(alpha) + ", L=" + fmt(gamma.lipschitz_bound) + ")");
  }
  return r;
}

CheckResult check_closed_forms(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "closed_forms";
  Timer timer(r);
  Tally t(r, 1e-4);
  const ClosedForm formula = cfg.closed_form ? cfg.closed_form : ClosedForm(ic_dirac_mixture);
  const double c = 0.25, l = 1.0;
  // Three points in each branch of alpha L x: (0, 1), [1, 1/c], (1/c, inf).
  const std::array<std::array<double, 3>, 3> branches{{{0.3, 0.6, 0.9}, {1.5, 2.5, 3.5}, {5.0, 8.0, 12.0}}};
  const std::array<double, 3> alphas{0.5, 2.0, 5.0};
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t k = 0; k < 3; ++k) {
      const double alpha = alphas[k], x = branches[b][k] / (alpha * l);
      const double brute = ic_primal_bruteforce(FiniteDistribution::dirac(2, 0), FiniteDistribution({c, 1 - c}), alpha,
                                                FunctionClassSpec::lipschitz(l), two_point(x))
                               .value.value();
      const double closed = formula(x, c, l, alpha) + cfg.closed_form_perturbation;
      t.record(std::abs(brute - closed), "branch " + std::to_string(b) + " alpha L x=" + fmt(branches[b][k]));
    }
  for (double x : {0.3, 1.0, 2.5}) {
    const double brute = ic_primal_bruteforce(FiniteDistribution::dirac(2, 0), FiniteDistribution::dirac(2, 1), 2.0,
                                              FunctionClassSpec::lipschitz(l), two_point(x))
                             .value.value();
    t.record(std::abs(brute - ic_two_diracs(x, l, 2.0)), "two Diracs x=" + fmt(x));
  }
  // alpha * ic with class Lip^1 / alpha against its alpha -> inf limit.
  const double cw = 0.3;
  for (double x : {0.5, 2.0, 4.0}) {
    const double limit = ic_wcr_dirac_mixture(x, cw);
    for (double alpha : {10.0, 100.0, 1000.0}) {
      const double v = alpha * ic_dual_bruteforce(FiniteDistribution::dirac(2, 0), FiniteDistribution({cw, 1 - cw}),
                                                  alpha, FunctionClassSpec::lipschitz(1.0 / alpha), two_point(x))
                                   .value.value();
      if (alpha == 1000.0) t.record(std::abs(v - limit), 1e-2, "large-alpha limit x=" + fmt(x));
    }
  }
  return r;
}

CheckResult check_bound(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "bound";
  Timer timer(r);
  Tally t(r, 1e-6);
  Rng rng(cfg.seed ^ 0x3);
  for (int k = 0; k < cfg.bound_instances; ++k) {
    const std::size_t n = 2 + rng.index(5);
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n);
    const auto space = random_space(rng, n);
    FunctionClassSpec gamma;
    switch (rng.index(3)) {
      case 0: gamma = FunctionClassSpec::lipschitz(rng.uniform(0.2, 3.0)); break;
      case 1: gamma = FunctionClassSpec::sup_norm(rng.uniform(0.1, 2.0)); break;
      default: gamma = FunctionClassSpec::dudley(rng.uniform(0.2, 3.0), rng.uniform(0.1, 2.0)); break;
    }
    for (double alpha : {0.5, 2.0, 5.0}) {
      const double ic = ic_dual_bruteforce(p, q, alpha, gamma, space).value.value();
      const double bound = min(renyi_finite(p, q, alpha), ipm_finite(q, p, gamma, space)).value();
      const std::string what = "instance " + std::to_string(k) + " alpha=" + fmt(alpha);
      t.record(ic - bound, what + " above min(Renyi, IPM)");
      t.record(-ic, 1e-9, what + " negative");
      const double unconstrained = ic_dual_bruteforce(p, q, alpha, FunctionClassSpec::all(), space).value.value();
      t.record(std::abs(unconstrained - renyi_finite(p, q, alpha).value()), 1e-3, what + " unconstrained vs Renyi");
    }
  }
  return r;
}

CheckResult check_interpolation(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "interpolation";
  Timer timer(r);
  Tally t(r, 1e-3);
  Rng rng(cfg.seed ^ 0x4);
  const auto gamma = FunctionClassSpec::lipschitz(1.0);
  for (int k = 0; k < 5; ++k) {
    const auto p = random_distribution(rng, 3), q = random_distribution(rng, 3);
    const auto space = random_space(rng, 3);
    const double alpha = pick(rng, std::array{0.5, 2.0, 5.0});
    const double ipm = ipm_finite(q, p, gamma, space).value();
    const double renyi = renyi_finite(p, q, alpha).value();
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double gap = ipm - ic_dual_bruteforce(p, q, alpha, gamma.scaled(delta), space).value.value() / delta;
      t.record(gap - prev, 1e-6, "IPM gap not shrinking, instance " + std::to_string(k));
      if (delta == 1e-4) t.record(std::abs(gap), "small-class limit, instance " + std::to_string(k));
      prev = gap;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
      const double gap = renyi - ic_dual_bruteforce(p, q, alpha, gamma.scaled(scale), space).value.value();
      t.record(gap - prev, 1e-6, "Renyi gap not shrinking, instance " + std::to_string(k));
      if (scale == 1000.0) t.record(std::abs(gap), "large-class limit, instance " + std::to_string(k));
      prev = gap;
    }
  }
  return r;
}

CheckResult check_monotonicity(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "monotonicity";
  Timer timer(r);
  Tally t(r, 1e-6);
  Rng rng(cfg.seed ^ 0x5);
  for (int k = 0; k < cfg.monotonicity_instances; ++k) {
    const std::size_t n = 2 + rng.index(4);
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n);
    const auto space = random_space(rng, n);
    const auto gamma = FunctionClassSpec::lipschitz(rng.uniform(0.3, 3.0));
    double prev = -std::numeric_limits<double>::infinity();
    for (double alpha : {1.5, 2.0, 5.0, 10.0, 50.0}) {
      const double v = alpha * ic_dual_bruteforce(p, q, alpha, gamma.scaled(1.0 / alpha), space).value.value();
      if (std::isfinite(prev)) t.record(prev - v, "instance " + std::to_string(k) + " at alpha=" + fmt(alpha));
      prev = v;
    }
  }
  return r;
}

CheckResult check_data_processing(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "data_processing";
  Timer timer(r);
  Tally t(r, 1e-6);
  Rng rng(cfg.seed ^ 0x6);
  for (int k = 0; k < cfg.data_processing_kernels; ++k) {
    const std::size_t nx = 2 + rng.index(3), ny = 2 + rng.index(3);
    const auto p = random_distribution(rng, nx), q = random_distribution(rng, nx);
    const auto gamma = FunctionClassSpec::lipschitz(rng.uniform(0.3, 3.0));
    const double alpha = pick(rng, std::array{0.5, 2.0, 5.0});
    Eigen::MatrixXd kernel(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
    for (Eigen::Index i = 0; i < kernel.size(); ++i) kernel.data()[i] = rng.uniform();
    kernel.array().colwise() /= kernel.rowwise().sum().array();
    const auto res = data_processing_check(p, q, kernel, alpha, gamma, random_space(rng, ny));
    t.record(res.lhs - res.rhs, "kernel " + std::to_string(k));
    const auto id = data_processing_check(p, q, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nx),
                                                                            static_cast<Eigen::Index>(nx)),
                                          alpha, gamma, random_space(rng, nx));
    t.record(std::abs(id.lhs - id.rhs), "identity kernel " + std::to_string(k));
  }
  return r;
}

CheckResult check_lower_bound(const OracleSuiteConfig& cfg) {
  CheckResult r;
  r.name = "lower_bound";
  Timer timer(r);
  Tally t(r, 1e-9);
  Rng rng(cfg.seed ^ 0x7);
  for (int k = 0; k < cfg.lower_bound_instances; ++k) {
    const std::size_t n = 2 + rng.index(4);
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n);
    const auto space = random_space(rng, n);
    const auto gamma = FunctionClassSpec::lipschitz(rng.uniform(0.3, 3.0));
    const Eigen::VectorXd wp = as_vector(p), wq = as_vector(q);
    const Eigen::MatrixXd box = class_bounds(gamma, space);
    const Eigen::MatrixXd free = class_bounds(FunctionClassSpec::all(), space);
    const auto ni = static_cast<Eigen::Index>(n);

    struct Case {
      ObjectiveFamily family;
      double exact;
      const Eigen::MatrixXd* bounds;  // nullptr: unconstrained real-valued (DV)
      Eigen::VectorXd optimum;        // probes near here as well
    };
    std::vector<Case> cases;
    for (double alpha : {0.5, 2.0, 6.0}) {
      const double renyi = renyi_finite(p, q, alpha).value();
      cases.push_back({ObjectiveFamily::dv_renyi(alpha), renyi, nullptr, (wp.array() / wq.array()).log().matrix()});
      cases.push_back({ObjectiveFamily::cc_renyi(alpha), renyi, &free,
                       ic_dual_bruteforce(p, q, alpha, FunctionClassSpec::all(), space).g});
      const auto ic = ic_dual_bruteforce(p, q, alpha, gamma, space);
      cases.push_back({ObjectiveFamily::ic_renyi(alpha), ic.value.value(), &box, ic.g});
      if (alpha > 1.0) {
        const auto rescaled = rescaled_ic_dual(p, q, alpha, gamma, space);
        cases.push_back({ObjectiveFamily::ic_rescaled(alpha), rescaled.value.value(), &box, rescaled.g});
      }
    }
    cases.push_back({ObjectiveFamily::cc_wcr(), wcr_finite(p, q).value(), &free,
                     wcr_ic_bruteforce(p, q, FunctionClassSpec::all(), space).g});
    const auto wcr = wcr_ic_bruteforce(p, q, gamma, space);
    cases.push_back({ObjectiveFamily::ic_wcr(), wcr.value.value(), &box, wcr.g});

    for (const auto& c : cases) {
      double worst = -std::numeric_limits<double>::infinity();
      for (int probe = 0; probe < cfg.lower_bound_probes; ++probe) {
        const bool near = probe % 5 == 0 && c.optimum.size() == ni;
        Eigen::VectorXd y(ni);
        const double scale = pick(rng, std::array{0.01, 0.3, 1.0, 5.0});
        for (Eigen::Index i = 0; i < ni; ++i) y[i] = (near ? c.optimum[i] : 0.0) + rng.normal(0.0, near ? 1e-3 : scale);
        Eigen::VectorXd g = y;
        if (c.bounds) {
          g = feasible_vector(rng, *c.bounds, y);
          if (near && c.optimum.maxCoeff() < 0.0) {
            // Keep the near-optimal probe close: undo the random downward shift.
            Eigen::VectorXd m(ni);
            for (Eigen::Index i = 0; i < ni; ++i) m[i] = (y.array() + c.bounds->row(i).transpose().array()).minCoeff();
            if (m.maxCoeff() < 0.0) g = m;
          }
        }
        const double v = evaluate_objective(c.family, {g, g, wp, wq}, 0.0, false).value;
        worst = std::max(worst, v - c.exact);
      }
      t.record(worst, "instance " + std::to_string(k) + " " + c.family.name());
    }
  }
  return r;
}

const std::vector<std::string>& oracle_check_names() {
  static const std::vector<std::string> names{"duality",      "closed_forms",    "bound",      "interpolation",
                                              "monotonicity", "data_processing", "lower_bound"};
  return names;
}

CheckResult run_oracle_check(const std::string& name, const OracleSuiteConfig& cfg) {
  if (name == "duality") return check_duality(cfg);
  if (name == "closed_forms") return check_closed_forms(cfg);
  if (name == "bound") return check_bound(cfg);
  if (name == "interpolation") return check_interpolation(cfg);
  if (name == "monotonicity") return check_monotonicity(cfg);
  if (name == "data_processing") return check_data_processing(cfg);
  if (name == "lower_bound") return check_lower_bound(cfg);
  throw std::invalid_argument("unknown oracle check: " + name);
}

bool OracleReport::all_passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string OracleReport::text() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << "  worst=" << fmt(c.worst) << " tol=" << fmt(c.tolerance)
       << " failures=" << c.failures << "/" << c.cases << "  " << c.detail << "  (" << fmt(c.seconds) << " s)\n";
  os << (all_passed() ? "all checks passed" : "some checks FAILED") << '\n';
  return os.str();
}

std::string oracle_csv(const OracleReport& report) {
  std::string s = std::string(kOracleCsvHeader) + "\n";
  for (const auto& c : report.checks)
    s += csv_line({c.name, c.passed ? "1" : "0", std::to_string(c.cases), std::to_string(c.failures),
                   csv_number(c.worst), csv_number(c.tolerance), csv_number(c.seconds)});
  return s;
}

OracleReport oracle_suite(const OracleSuiteConfig& cfg, int jobs, const std::string& out_dir) {
  cfg.validate();
  const std::vector<std::string> names = cfg.checks.empty() ? oracle_check_names() : cfg.checks;
  OracleReport report;
  report.checks.resize(names.size());
  parallel_for(static_cast<int>(names.size()), jobs, [&](int i) {
    report.checks[static_cast<std::size_t>(i)] = run_oracle_check(names[static_cast<std::size_t>(i)], cfg);
  });
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    write_config_echo(out_dir, cfg.to_json());
    const std::filesystem::path dir(out_dir);
    write_text((dir / "results.csv").string(), oracle_csv(report));
    write_text((dir / "report.txt").string(), report.text());
  }
  return report;
}

}  // namespace icrenyi::experiments
