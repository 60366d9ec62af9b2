#include "icrenyi/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace icrenyi {

namespace {

constexpr std::uint64_t kInitStream = 0x9e3779b97f4a7c15ULL;

std::vector<int> layer_sizes(Eigen::Index dim, const NetConfig& net) {
  std::vector<int> sizes{static_cast<int>(dim)};
  sizes.insert(sizes.end(), net.hidden.begin(), net.hidden.end());
  sizes.push_back(1);
  return sizes;
}

void validate_set(const SampleSet& s, const char* which) {
  if (s.size() == 0) throw std::invalid_argument(std::string(which) + " sample set is empty");
  if (s.weighted() && s.weights.size() != s.size())
    throw std::invalid_argument(std::string(which) + " weights do not match the number of points");
}

void draw_minibatch(const SampleSet& s, int m, Rng& rng, Eigen::MatrixXd& out) {
  out.resize(s.dim(), m);
  for (Eigen::Index j = 0; j < m; ++j)
    out.col(j) = s.points.col(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(s.size()))));
}

}  // namespace

std::string to_string(EvalMode m) { return m == EvalMode::full_sample ? "full_sample" : "window_average"; }

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "full_sample") return EvalMode::full_sample;
  if (s == "window_average") return EvalMode::window_average;
  throw std::invalid_argument("unknown eval_mode: " + s);
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (minibatch <= 0) throw std::invalid_argument("minibatch must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (estimate_window <= 0 || estimate_window > epochs)
    throw std::invalid_argument("estimate_window must lie in [1, epochs]");
  penalty.validate();
}

void validate_family_net(const ObjectiveFamily& family, const NetConfig& net) {
  family.validate();
  for (int w : net.hidden)
    if (w <= 0) throw std::invalid_argument("hidden widths must be positive");
  const bool identity = net.final_layer == FinalLayer::identity;
  if (family.negative_class() && identity)
    throw std::invalid_argument(family.name() + " needs a neg_abs or poly_softplus final layer");
  if (!family.negative_class() && !identity)
    throw std::invalid_argument(family.name() + " needs an identity final layer");
}

double evaluate_network(const Mlp& f, const SampleSet& p, const SampleSet& q, const ObjectiveFamily& family,
                        const PenaltySpec& penalty_spec, Rng& rng) {
  const double pen = family.penalized() ? penalty(f, p.points, q.points, penalty_spec, rng) : 0.0;
  BatchOutputs b{f.forward(p.points).row(0).transpose(), f.forward(q.points).row(0).transpose(), p.weights,
                 q.weights};
  return evaluate_objective(family, b, pen, false).value;
}

EstimateResult estimate_divergence(const SampleSet& p, const SampleSet& q, const ObjectiveFamily& family,
                                   const NetConfig& net, const TrainConfig& train, Mlp* trained) {
  validate_set(p, "P");
  validate_set(q, "Q");
  if (p.dim() != q.dim()) throw std::invalid_argument("P and Q samples differ in dimension");
  validate_family_net(family, net);
  train.validate();
  if (!p.weighted() && train.minibatch > p.size()) throw std::invalid_argument("minibatch exceeds P sample size");
  if (!q.weighted() && train.minibatch > q.size()) throw std::invalid_argument("minibatch exceeds Q sample size");

  const auto started = std::chrono::steady_clock::now();
  EstimateResult result;
  result.seed = train.seed;
  result.trace.reserve(static_cast<std::size_t>(train.epochs));

  Mlp f(layer_sizes(p.dim(), net), net.final_layer, train.init_seed.value_or(train.seed ^ kInitStream));
  AdamState adam(f.params(), AdamHyper{train.learning_rate, train.beta1, train.beta2, train.adam_epsilon});
  Rng rng(train.seed);
  const bool penalised = family.penalized() && train.penalty.weight > 0.0;

  auto fail = [&](std::string why) {
    result.nan_failure = true;
    result.failure_reason = std::move(why);
  };

  Tape tape_p, tape_q;
  Eigen::MatrixXd bp = p.points, bq = q.points;
  Parameters grads = zeros_like(f.params());
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    if (!p.weighted()) draw_minibatch(p, train.minibatch, rng, bp);
    if (!q.weighted()) draw_minibatch(q, train.minibatch, rng, bq);

    for (auto& layer : grads) {
      layer.weight.setZero();
      layer.bias.setZero();
    }
    const double pen = penalised ? penalty(f, bp, bq, train.penalty, rng, &grads, -1.0) : 0.0;
    BatchOutputs batch{f.forward(bp, tape_p).row(0).transpose(), f.forward(bq, tape_q).row(0).transpose(),
                       p.weights, q.weights};
    ObjectiveValue obj;
    try {
      obj = evaluate_objective(family, batch, pen, true);
    } catch (const ConstraintViolation& e) {
      fail(e.what());
      break;
    }
    f.backward(tape_p, obj.d_p.transpose(), &grads, nullptr);
    f.backward(tape_q, obj.d_q.transpose(), &grads, nullptr);
    if (!std::isfinite(obj.value) || !all_finite(grads)) {
      fail("non-finite objective or gradient at step " + std::to_string(epoch));
      break;
    }
    result.trace.push_back(obj.value);
    scale(grads, -1.0);  // ascent
    adam_step(adam, f.params(), grads);
    if (!all_finite(f.params())) {
      fail("non-finite parameters after step " + std::to_string(epoch));
      break;
    }
  }

  if (!result.nan_failure) {
    double est = 0.0;
    if (train.eval_mode == EvalMode::window_average) {
      const auto w = static_cast<std::size_t>(train.estimate_window);
      for (std::size_t k = result.trace.size() - w; k < result.trace.size(); ++k) est += result.trace[k];
      est /= static_cast<double>(w);
    } else {
      try {
        est = evaluate_network(f, p, q, family, train.penalty, rng);
      } catch (const ConstraintViolation& e) {
        fail(e.what());
      }
    }
    if (!result.nan_failure && !std::isfinite(est)) fail("non-finite final estimate");
    if (!result.nan_failure) result.estimate = est;
  }

  if (p.weighted() && q.weighted() && !result.trace.empty()) {
    for (std::size_t k = result.trace.size() / 10 + 1; k < result.trace.size(); ++k)
      if (result.trace[k] < result.trace[k - 1] - 1e-6) {
        result.trace_flag = true;
        break;
      }
  }
  if (trained) *trained = f;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ReplicateSummary run_replicates(const ReplicateSpec& spec, int n_runs, int jobs) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be positive");
  if (!spec.draw_p || !spec.draw_q) throw std::invalid_argument("replicate spec needs both samplers");
  validate_family_net(spec.family, spec.net);
  spec.train.validate();
  jobs = std::clamp(jobs, 1, n_runs);

  ReplicateSummary summary;
  summary.n_runs = n_runs;
  summary.runs.resize(static_cast<std::size_t>(n_runs));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (int i = next++; i < n_runs; i = next++) {
      try {
        TrainConfig cfg = spec.train;
        cfg.seed = spec.train.seed + static_cast<std::uint64_t>(i);
        Rng data(cfg.seed);
        const SampleSet p = spec.draw_p(data);
        const SampleSet q = spec.draw_q(data);
        summary.runs[static_cast<std::size_t>(i)] = estimate_divergence(p, q, spec.family, spec.net, cfg);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> ok;
  for (const auto& r : summary.runs)
    if (r.estimate) ok.push_back(*r.estimate);
  summary.n_failed = n_runs - static_cast<int>(ok.size());
  summary.failure_rate = static_cast<double>(summary.n_failed) / n_runs;
  if (ok.empty()) throw AllRunsFailed("all " + std::to_string(n_runs) + " runs failed");

  double sum = 0.0;
  for (double v : ok) sum += v;
  summary.mean = sum / static_cast<double>(ok.size());
  double ss = 0.0, se = 0.0;
  for (double v : ok) {
    ss += (v - summary.mean) * (v - summary.mean);
    if (spec.reference) se += (v - *spec.reference) * (v - *spec.reference);
  }
  summary.variance = ok.size() > 1 ? ss / static_cast<double>(ok.size() - 1) : 0.0;
  summary.mse = spec.reference ? se / static_cast<double>(ok.size()) : std::numeric_limits<double>::quiet_NaN();
  return summary;
}

Eigen::VectorXd project_difference_constraints(const Eigen::VectorXd& g, const Eigen::MatrixXd& bounds,
                                               double negativity, int max_sweeps) {
  const Eigen::Index n = g.size();
  if (bounds.rows() != n || bounds.cols() != n) throw std::invalid_argument("bounds must be n x n");
  struct Half {
    Eigen::Index i, j;  // g_i - g_j <= b, or g_i <= b when j < 0
    double b;
  };
  std::vector<Half> halves;
  for (Eigen::Index i = 0; i < n; ++i) {
    halves.push_back({i, -1, -negativity});
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && std::isfinite(bounds(i, j))) halves.push_back({i, j, bounds(i, j)});
  }
  Eigen::VectorXd x = g;
  std::vector<Eigen::VectorXd> incr(halves.size(), Eigen::VectorXd::Zero(n));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::VectorXd before = x;
    for (std::size_t k = 0; k < halves.size(); ++k) {
      const Half& h = halves[k];
      Eigen::VectorXd y = x + incr[k];
      const double lhs = h.j < 0 ? y[h.i] : y[h.i] - y[h.j];
      Eigen::VectorXd proj = y;
      if (lhs > h.b) {
        if (h.j < 0) {
          proj[h.i] = h.b;
        } else {
          const double shift = 0.5 * (lhs - h.b);
          proj[h.i] -= shift;
          proj[h.j] += shift;
        }
      }
      incr[k] = y - proj;
      x = proj;
    }
    if ((x - before).cwiseAbs().maxCoeff() < 1e-15) break;
  }
  return x;
}

TabularResult estimate_tabular(const FiniteDistribution& p, const FiniteDistribution& q,
                               const ObjectiveFamily& family, const FunctionClassSpec& gamma,
                               const MetricSpace& space, const TabularOptions& opts) {
  family.validate();
  gamma.validate();
  if (!family.negative_class()) throw std::invalid_argument("tabular estimates need a negative-class family");
  if (!p.same_support(q) || p.size() != space.size())
    throw std::invalid_argument("p, q and the metric space must share one support");
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd bounds(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      bounds(i, j) = i == j ? 0.0
                            : gamma.difference_bound(space(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  Eigen::VectorXd wp(n), wq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    wp[i] = p[static_cast<std::size_t>(i)];
    wq[i] = q[static_cast<std::size_t>(i)];
  }
  auto eval = [&](const Eigen::VectorXd& g, Eigen::VectorXd* grad) {
    const ObjectiveValue v = evaluate_objective(family, BatchOutputs{g, g, wp, wq}, 0.0, grad != nullptr);
    if (grad) *grad = v.d_p + v.d_q;
    return v.value;
  };

  TabularResult res;
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, -1.0);
  Eigen::VectorXd grad;
  double value = eval(g, &grad);
  double step = 1.0;
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    bool accepted = false;
    Eigen::VectorXd cand;
    double cand_value = value;
    for (int bt = 0; bt < 60; ++bt) {
      cand = project_difference_constraints(g + step * grad, bounds, opts.negativity);
      const Eigen::VectorXd d = cand - g;
      cand_value = eval(cand, nullptr);
      if (std::isfinite(cand_value) && cand_value >= value + grad.dot(d) - d.squaredNorm() / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double gain = cand_value - value;
    g = cand;
    value = eval(g, &grad);
    step *= 2.0;
    if (gain <= opts.tolerance * std::max(1.0, std::abs(value))) break;
  }
  res.value = value;
  res.g = g;
  return res;
}

}  // namespace icrenyi
