#include "icrenyi/objectives.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace icrenyi {

namespace {

constexpr double kNegligibleWeight = 1e-200;

Eigen::VectorXd normalised(const Eigen::VectorXd& w, Eigen::Index n, const char* which) {
  if (n == 0) throw std::invalid_argument(std::string("empty ") + which + " batch");
  if (w.size() == 0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (w.size() != n) throw std::invalid_argument(std::string(which) + " weights do not match batch size");
  if ((w.array() < 0.0).any() || !w.allFinite())
    throw std::invalid_argument(std::string(which) + " weights must be finite and nonnegative");
  const double total = w.sum();
  if (!(total > 0.0)) throw std::invalid_argument(std::string(which) + " weights sum to zero");
  return w / total;
}

void require_negative(const Eigen::VectorXd& g, const Eigen::VectorXd& w, const char* which) {
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (w[i] > 0.0 && !(g[i] < 0.0))
      throw ConstraintViolation(std::string("test function must be negative on the ") + which + " batch");
}

// (1/k) log E_P |g|^s with its gradient, k = 1/scale. The |g| clamp keeps
// the power finite when g is tiny and s < 0.
double log_power_mean(const Eigen::VectorXd& g, const Eigen::VectorXd& w, double s, double scale,
                      Eigen::VectorXd* grad, bool& overflow) {
  const Eigen::Index n = g.size();
  Eigen::VectorXd logs(n);
  for (Eigen::Index i = 0; i < n; ++i) logs[i] = s * std::log(std::max(-g[i], kAbsClamp));
  // Work in log space: log sum w |g|^s.
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (w[i] > 0.0) mx = std::max(mx, logs[i]);
  if (mx > std::log(kOverflowFlag)) overflow = true;
  double acc = 0.0;
  Eigen::VectorXd terms(n);
  for (Eigen::Index i = 0; i < n; ++i) acc += (terms[i] = w[i] > 0.0 ? w[i] * std::exp(logs[i] - mx) : 0.0);
  if (grad) {
    grad->resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::max(-g[i], kAbsClamp);
      // d/dg_i of log sum = -(s / |g_i|) * term_i / acc on the unclamped side.
      (*grad)[i] = (-g[i] >= kAbsClamp) ? -scale * s * terms[i] / (acc * a) : 0.0;
    }
  }
  return scale * (mx + std::log(acc));
}

}  // namespace

std::string to_string(ObjectiveTag t) {
  switch (t) {
    case ObjectiveTag::dv_renyi: return "dv_renyi";
    case ObjectiveTag::cc_renyi: return "cc_renyi";
    case ObjectiveTag::cc_wcr: return "cc_wcr";
    case ObjectiveTag::ic_renyi: return "ic_renyi";
    case ObjectiveTag::ic_rescaled: return "ic_rescaled";
    case ObjectiveTag::ic_wcr: return "ic_wcr";
    case ObjectiveTag::ipm: return "ipm";
  }
  return "?";
}

ObjectiveTag objective_tag_from_string(const std::string& s) {
  for (auto t : {ObjectiveTag::dv_renyi, ObjectiveTag::cc_renyi, ObjectiveTag::cc_wcr, ObjectiveTag::ic_renyi,
                 ObjectiveTag::ic_rescaled, ObjectiveTag::ic_wcr, ObjectiveTag::ipm})
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown objective family: " + s);
}

bool ObjectiveFamily::needs_alpha() const {
  return tag == ObjectiveTag::dv_renyi || tag == ObjectiveTag::cc_renyi || tag == ObjectiveTag::ic_renyi ||
         tag == ObjectiveTag::ic_rescaled;
}

bool ObjectiveFamily::negative_class() const { return tag != ObjectiveTag::dv_renyi && tag != ObjectiveTag::ipm; }

bool ObjectiveFamily::penalized() const {
  return tag == ObjectiveTag::ic_renyi || tag == ObjectiveTag::ic_rescaled || tag == ObjectiveTag::ic_wcr ||
         tag == ObjectiveTag::ipm;
}

std::string ObjectiveFamily::name() const {
  if (!alpha) return to_string(tag);
  std::ostringstream os;
  os << to_string(tag) << "(alpha=" << *alpha << ")";
  return os.str();
}

void ObjectiveFamily::validate() const {
  if (needs_alpha()) {
    if (!alpha) throw std::invalid_argument(to_string(tag) + " requires alpha");
    const double a = *alpha;
    if (!(a > 0.0) || a == 1.0 || !std::isfinite(a))
      throw std::invalid_argument(to_string(tag) + " requires alpha in (0,1) or (1,inf)");
  } else if (alpha) {
    throw std::invalid_argument(to_string(tag) + " takes no alpha");
  }
}

double log_mean_exp(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  const Eigen::VectorXd wn = normalised(w, x.size(), "log_mean_exp");
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (wn[i] > 0.0) mx = std::max(mx, x[i]);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (wn[i] > 0.0) acc += wn[i] * std::exp(x[i] - mx);
  return mx + std::log(acc);
}

ObjectiveValue evaluate_objective(const ObjectiveFamily& family, const BatchOutputs& batch, double penalty_value,
                                  bool want_grad) {
  family.validate();
  const Eigen::VectorXd wp = normalised(batch.w_p, batch.g_on_p.size(), "P");
  const Eigen::VectorXd wq = normalised(batch.w_q, batch.g_on_q.size(), "Q");
  const Eigen::VectorXd& gp = batch.g_on_p;
  const Eigen::VectorXd& gq = batch.g_on_q;
  if (family.negative_class()) {
    require_negative(gp, wp, "P");
    require_negative(gq, wq, "Q");
  }

  ObjectiveValue out;
  Eigen::VectorXd* dp = want_grad ? &out.d_p : nullptr;
  const double mean_q = wq.dot(gq);
  if (want_grad) out.d_q = wq;

  switch (family.tag) {
    case ObjectiveTag::dv_renyi: {
      const double a = *family.alpha;
      // (a-1)^{-1} LME((a-1) phi_P) - a^{-1} LME(a phi_Q); softmax weights for the gradient.
      const double lp = log_mean_exp((a - 1.0) * gp, wp);
      const double lq = log_mean_exp(a * gq, wq);
      out.value = lp / (a - 1.0) - lq / a;
      if (want_grad) {
        out.d_p = (wp.array() * ((a - 1.0) * gp.array() - lp).exp()).matrix();
        out.d_q = -(wq.array() * (a * gq.array() - lq).exp()).matrix();
        // Drop negligible softmax weights before they reach backprop as
        // subnormals, which are very slow.
        out.d_p = (out.d_p.array().abs() < kNegligibleWeight).select(0.0, out.d_p);
        out.d_q = (out.d_q.array().abs() < kNegligibleWeight).select(0.0, out.d_q);
      }
      break;
    }
    case ObjectiveTag::cc_renyi:
    case ObjectiveTag::ic_renyi: {
      const double a = *family.alpha;
      const double s = (a - 1.0) / a;
      out.value = mean_q + log_power_mean(gp, wp, s, 1.0 / (a - 1.0), dp, out.overflow_flag) +
                  (std::log(a) + 1.0) / a;
      break;
    }
    case ObjectiveTag::ic_rescaled: {
      const double a = *family.alpha;
      const double s = (a - 1.0) / a;
      out.value = mean_q + log_power_mean(gp, wp, s, a / (a - 1.0), dp, out.overflow_flag) + 1.0;
      break;
    }
    case ObjectiveTag::cc_wcr:
    case ObjectiveTag::ic_wcr:
      out.value = mean_q + log_power_mean(gp, wp, 1.0, 1.0, dp, out.overflow_flag) + 1.0;
      break;
    case ObjectiveTag::ipm:
      out.value = wp.dot(gp) - mean_q;
      if (want_grad) {
        out.d_p = wp;
        out.d_q = -wq;
      }
      break;
  }
  if (family.tag == ObjectiveTag::cc_renyi || family.tag == ObjectiveTag::cc_wcr ||
      family.tag == ObjectiveTag::dv_renyi) {
    if (penalty_value != 0.0) throw std::invalid_argument(family.name() + " is unpenalised");
  } else if (!(penalty_value >= 0.0)) {
    throw std::invalid_argument("penalty value must be >= 0");
  }
  out.value -= penalty_value;
  return out;
}

namespace {
double value_of(const ObjectiveFamily& f, const Eigen::VectorXd& gp, const Eigen::VectorXd& gq, double pen) {
  return evaluate_objective(f, BatchOutputs{gp, gq, {}, {}}, pen, false).value;
}
}  // namespace

double dv_renyi_objective(const Eigen::VectorXd& phi_on_p, const Eigen::VectorXd& phi_on_q, double alpha) {
  return value_of(ObjectiveFamily::dv_renyi(alpha), phi_on_p, phi_on_q, 0.0);
}
double cc_renyi_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha) {
  return value_of(ObjectiveFamily::cc_renyi(alpha), g_on_p, g_on_q, 0.0);
}
double cc_wcr_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q) {
  return value_of(ObjectiveFamily::cc_wcr(), g_on_p, g_on_q, 0.0);
}
double ic_renyi_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha,
                          double penalty_value) {
  return value_of(ObjectiveFamily::ic_renyi(alpha), g_on_p, g_on_q, penalty_value);
}
double ic_rescaled_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double alpha,
                             double penalty_value) {
  return value_of(ObjectiveFamily::ic_rescaled(alpha), g_on_p, g_on_q, penalty_value);
}
double ic_wcr_objective(const Eigen::VectorXd& g_on_p, const Eigen::VectorXd& g_on_q, double penalty_value) {
  return value_of(ObjectiveFamily::ic_wcr(), g_on_p, g_on_q, penalty_value);
}

}  // namespace icrenyi
