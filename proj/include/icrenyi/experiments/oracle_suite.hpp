#pragma once

// Cross-checks between the exact finite-space values, the brute-force
// oracles and the objective functions. Each check is usable on its own; the
// suite runs all of them and reports pass/fail.

#include <functional>
#include <string>
#include <vector>

#include "icrenyi/experiments/config.hpp"

namespace icrenyi::experiments {

/// Closed form for the Dirac-mixture IC value, (x, c, L, alpha) -> value.
using ClosedForm = std::function<double(double, double, double, double)>;

struct OracleSuiteConfig {
  std::uint64_t seed = 20240601;
  int duality_instances = 50;
  int bound_instances = 50;
  int monotonicity_instances = 20;
  int data_processing_kernels = 50;
  int lower_bound_instances = 10;
  int lower_bound_probes = 10000;
  /// Names of checks to run; empty runs everything.
  std::vector<std::string> checks;
  /// Added to the closed form before comparison. Nonzero values exist to
  /// confirm the closed-form check can fail.
  double closed_form_perturbation = 0.0;
  /// Replaces the closed form (code only, not configurable from JSON).
  ClosedForm closed_form;

  static OracleSuiteConfig from_json(const json& j);
  [[nodiscard]] json to_json() const;
  void validate() const;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;      ///< largest violation or error seen
  double tolerance = 0.0;
  std::string detail;      ///< first failing case, or a summary
  double seconds = 0.0;
};

/// primal vs dual on random two/three-point spaces.
CheckResult check_duality(const OracleSuiteConfig& cfg);
/// Dirac-mixture closed forms in every branch plus the large-alpha limit.
CheckResult check_closed_forms(const OracleSuiteConfig& cfg);
/// ic <= min(Renyi, IPM); the unconstrained class recovers Renyi.
CheckResult check_bound(const OracleSuiteConfig& cfg);
/// Small/large class scalings approach the IPM and Renyi endpoints.
CheckResult check_interpolation(const OracleSuiteConfig& cfg);
/// alpha -> alpha * ic(Gamma / alpha) is non-decreasing.
CheckResult check_monotonicity(const OracleSuiteConfig& cfg);
/// Pushforward through a kernel cannot increase the divergence.
CheckResult check_data_processing(const OracleSuiteConfig& cfg);
/// No objective evaluated with exact weights exceeds the exact divergence.
CheckResult check_lower_bound(const OracleSuiteConfig& cfg);

/// All check names in run order.
const std::vector<std::string>& oracle_check_names();
CheckResult run_oracle_check(const std::string& name, const OracleSuiteConfig& cfg);

struct OracleReport {
  std::vector<CheckResult> checks;
  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] std::string text() const;
};

inline constexpr const char* kOracleCsvHeader = "check,passed,cases,failures,worst,tolerance,seconds";
std::string oracle_csv(const OracleReport& report);

/// Runs the selected checks (concurrently when jobs > 1) and writes
/// results.csv, report.txt and config.echo when out_dir is nonempty.
OracleReport oracle_suite(const OracleSuiteConfig& cfg, int jobs = 1, const std::string& out_dir = {});

}  // namespace icrenyi::experiments
