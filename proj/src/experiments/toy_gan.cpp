#include "icrenyi/experiments/toy_gan.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include "icrenyi/adam.hpp"
#include "icrenyi/experiments/output.hpp"
#include "icrenyi/experiments/parallel.hpp"
#include "icrenyi/serialize.hpp"

namespace icrenyi::experiments {

namespace {

constexpr std::uint64_t kGeneratorStream = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kCriticStream = 0xbb67ae8584caa73bULL;
constexpr std::uint64_t kEvalStream = 0x3c6ef372fe94f82bULL;

ObjectiveFamily parse_gan_family(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "wasserstein_gp") return ObjectiveFamily::ipm();
  ObjectiveFamily f = parse_family(j, where);
  if (f.tag != ObjectiveTag::ic_renyi && f.tag != ObjectiveTag::ic_rescaled && f.tag != ObjectiveTag::ic_wcr &&
      f.tag != ObjectiveTag::ipm)
    throw ConfigError(where + ": GAN families are ic_renyi, ic_rescaled, ic_wcr and wasserstein_gp");
  return f;
}

json gan_family_to_json(const ObjectiveFamily& f) {
  return f.tag == ObjectiveTag::ipm ? json("wasserstein_gp") : family_to_json(f);
}

std::string gan_family_name(const ObjectiveFamily& f) {
  return f.tag == ObjectiveTag::ipm ? "wasserstein_gp" : icrenyi::to_string(f.tag);
}

Eigen::MatrixXd normal_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  return z;
}

std::vector<int> generator_sizes(const GanConfig& c) {
  std::vector<int> s{c.noise_dim};
  s.insert(s.end(), c.generator_hidden.begin(), c.generator_hidden.end());
  s.push_back(2);
  return s;
}

std::vector<int> critic_sizes(const GanConfig& c) {
  std::vector<int> s{2};
  s.insert(s.end(), c.critic.hidden.begin(), c.critic.hidden.end());
  s.push_back(1);
  return s;
}

}  // namespace

std::string to_string(GanTarget t) {
  switch (t) {
    case GanTarget::gaussian_ring_8: return "gaussian_ring_8";
    case GanTarget::two_moons: return "two_moons";
    case GanTarget::grid_25: return "grid_25";
  }
  return "?";
}

GanTarget gan_target_from_string(const std::string& s) {
  for (auto t : {GanTarget::gaussian_ring_8, GanTarget::two_moons, GanTarget::grid_25})
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown GAN target: " + s);
}

Eigen::MatrixXd TargetSpec::centres() const {
  if (kind == GanTarget::gaussian_ring_8) {
    Eigen::MatrixXd c(2, 8);
    for (int k = 0; k < 8; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 8.0;
      c(0, k) = radius * std::cos(t);
      c(1, k) = radius * std::sin(t);
    }
    return c;
  }
  if (kind == GanTarget::grid_25) {
    Eigen::MatrixXd c(2, 25);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        c(0, 5 * i + j) = radius * (i - 2) / 2.0;
        c(1, 5 * i + j) = radius * (j - 2) / 2.0;
      }
    return c;
  }
  return Eigen::MatrixXd(2, 0);
}

Eigen::MatrixXd TargetSpec::sample(Rng& rng, int n) const {
  Eigen::MatrixXd x(2, n);
  if (kind == GanTarget::two_moons) {
    // Upper arc of the unit circle and the lower arc shifted by (1, -0.5), scaled by radius / 2.
    for (int j = 0; j < n; ++j) {
      const double t = std::numbers::pi * rng.uniform();
      const bool upper = rng.uniform() < 0.5;
      const double px = upper ? std::cos(t) : 1.0 - std::cos(t);
      const double py = upper ? std::sin(t) : 0.5 - std::sin(t);
      x(0, j) = 0.5 * radius * px + rng.normal(0.0, mode_std);
      x(1, j) = 0.5 * radius * py + rng.normal(0.0, mode_std);
    }
    return x;
  }
  const Eigen::MatrixXd c = centres();
  for (int j = 0; j < n; ++j) {
    const auto k = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(c.cols())));
    x(0, j) = c(0, k) + rng.normal(0.0, mode_std);
    x(1, j) = c(1, k) + rng.normal(0.0, mode_std);
  }
  return x;
}

int mode_coverage(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& centres, double radius,
                  double min_fraction) {
  if (samples.cols() == 0) return 0;
  int covered = 0;
  const double r2 = radius * radius;
  for (Eigen::Index k = 0; k < centres.cols(); ++k) {
    const auto near = ((samples.colwise() - centres.col(k)).colwise().squaredNorm().array() <= r2).count();
    if (static_cast<double>(near) >= min_fraction * static_cast<double>(samples.cols())) ++covered;
  }
  return covered;
}

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0 || b.cols() == 0 || a.rows() != b.rows())
    throw std::invalid_argument("energy_distance needs nonempty point sets of equal dimension");
  auto mean_dist = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) s += (x.colwise() - y.col(j)).colwise().norm().sum();
    return s / (static_cast<double>(x.cols()) * static_cast<double>(y.cols()));
  };
  return 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

GanConfig GanConfig::from_json(const json& j) {
  GanConfig c;
  KeyReader r(j, "toy_gan");
  if (r.has("family")) c.family = parse_gan_family(r.sub("family"), "toy_gan.family");
  if (r.has("target")) {
    KeyReader t(r.sub("target"), "toy_gan.target");
    try {
      c.target.kind = gan_target_from_string(t.get("kind", to_string(c.target.kind)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("toy_gan.target.kind: ") + e.what());
    }
    c.target.radius = t.get("radius", c.target.radius);
    c.target.mode_std = t.get("mode_std", c.target.mode_std);
    t.finish();
  }
  c.noise_dim = r.get("noise_dim", c.noise_dim);
  c.generator_hidden = r.get("generator_hidden", c.generator_hidden);
  if (r.has("critic")) c.critic = parse_net(r.sub("critic"), "toy_gan.critic", c.critic);
  c.critic_steps = r.get("critic_steps", c.critic_steps);
  c.generator_steps = r.get("generator_steps", c.generator_steps);
  c.batch = r.get("batch", c.batch);
  c.learning_rate = r.get("learning_rate", c.learning_rate);
  c.beta1 = r.get("beta1", c.beta1);
  c.beta2 = r.get("beta2", c.beta2);
  if (r.has("penalty")) c.penalty = parse_penalty(r.sub("penalty"), "toy_gan.penalty", c.penalty);
  c.eval_every = r.get("eval_every", c.eval_every);
  c.eval_samples = r.get("eval_samples", c.eval_samples);
  if (r.has("stop_at_coverage") && !r.sub("stop_at_coverage").is_null())
    c.stop_at_coverage = r.required<int>("stop_at_coverage");
  c.seed = r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

json GanConfig::to_json() const {
  return {{"family", gan_family_to_json(family)},
          {"target", {{"kind", to_string(target.kind)}, {"radius", target.radius}, {"mode_std", target.mode_std}}},
          {"noise_dim", noise_dim},
          {"generator_hidden", generator_hidden},
          {"critic", net_to_json(critic)},
          {"critic_steps", critic_steps},
          {"generator_steps", generator_steps},
          {"batch", batch},
          {"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"penalty", penalty_to_json(penalty)},
          {"eval_every", eval_every},
          {"eval_samples", eval_samples},
          {"stop_at_coverage", stop_at_coverage ? json(*stop_at_coverage) : json(nullptr)},
          {"seed", seed}};
}

void GanConfig::validate() const {
  if (family.tag == ObjectiveTag::dv_renyi || family.tag == ObjectiveTag::cc_renyi ||
      family.tag == ObjectiveTag::cc_wcr)
    throw ConfigError("toy_gan: family must be ic_renyi, ic_rescaled, ic_wcr or wasserstein_gp");
  try {
    family.validate();
    penalty.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("toy_gan: ") + e.what());
  }
  if (noise_dim < 1) throw ConfigError("toy_gan.noise_dim must be >= 1");
  if (critic_steps < 1) throw ConfigError("toy_gan.critic_steps must be >= 1");
  if (generator_steps < 1 || batch < 1 || eval_every < 1 || eval_samples < 1)
    throw ConfigError("toy_gan: step counts, batch and evaluation sizes must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("toy_gan.learning_rate must be positive");
  if (!(target.radius > 0.0) || !(target.mode_std > 0.0)) throw ConfigError("toy_gan.target: radius and mode_std must be positive");
  for (int w : generator_hidden)
    if (w <= 0) throw ConfigError("toy_gan.generator_hidden: widths must be positive");
  if (family.negative_class() && critic.final_layer == FinalLayer::identity)
    throw ConfigError("toy_gan.critic.final_layer must be neg_abs or poly_softplus for IC families");
}

GanResult train_gan(const GanConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  NetConfig critic_net = cfg.critic;
  if (!cfg.family.negative_class()) critic_net.final_layer = FinalLayer::identity;
  Mlp gen(generator_sizes(cfg), FinalLayer::identity, cfg.seed ^ kGeneratorStream);
  Mlp critic(critic_sizes(cfg), critic_net.final_layer, cfg.seed ^ kCriticStream);
  const AdamHyper hyper{cfg.learning_rate, cfg.beta1, cfg.beta2, 1e-8};
  AdamState gen_adam(gen.params(), hyper), critic_adam(critic.params(), hyper);
  Rng rng(cfg.seed);

  GanResult res;
  const Eigen::MatrixXd centres = cfg.target.centres();
  const double cover_radius = 3.0 * cfg.target.mode_std;
  const int full = cfg.stop_at_coverage.value_or(static_cast<int>(centres.cols()));

  auto fail = [&](const std::string& why) {
    res.nan_failure = true;
    res.failure_reason = why;
  };

  Parameters critic_grads = zeros_like(critic.params());
  Parameters gen_grads = zeros_like(gen.params());
  Tape tp, tq, tg;
  Eigen::MatrixXd x_grad;
  double last_objective = 0.0;

  for (int step = 0; step < cfg.generator_steps && !res.nan_failure; ++step) {
    // Critic ascent on objective - penalty.
    for (int k = 0; k < cfg.critic_steps; ++k) {
      const Eigen::MatrixXd real = cfg.target.sample(rng, cfg.batch);
      const Eigen::MatrixXd fake = gen.forward(normal_matrix(rng, cfg.noise_dim, cfg.batch));
      for (auto& l : critic_grads) {
        l.weight.setZero();
        l.bias.setZero();
      }
      const double pen = penalty(critic, real, fake, cfg.penalty, rng, &critic_grads, -1.0);
      ObjectiveValue obj;
      try {
        obj = evaluate_objective(cfg.family,
                                 {critic.forward(real, tp).row(0).transpose(),
                                  critic.forward(fake, tq).row(0).transpose(), {}, {}},
                                 pen);
      } catch (const ConstraintViolation& e) {
        fail(std::string("critic: ") + e.what());
        break;
      }
      critic.backward(tp, obj.d_p.transpose(), &critic_grads, nullptr);
      critic.backward(tq, obj.d_q.transpose(), &critic_grads, nullptr);
      if (!std::isfinite(obj.value) || !all_finite(critic_grads)) {
        fail("non-finite critic objective or gradient at generator step " + std::to_string(step));
        break;
      }
      last_objective = obj.value;
      scale(critic_grads, -1.0);
      adam_step(critic_adam, critic.params(), critic_grads);
    }
    if (res.nan_failure) break;

    // Generator descent: only the Q-side term depends on the generator.
    {
      const Eigen::MatrixXd real = cfg.target.sample(rng, cfg.batch);
      const Eigen::MatrixXd fake = gen.forward(normal_matrix(rng, cfg.noise_dim, cfg.batch), tg);
      ObjectiveValue obj;
      try {
        obj = evaluate_objective(cfg.family,
                                 {critic.forward(real).row(0).transpose(), critic.forward(fake, tq).row(0).transpose(),
                                  {}, {}},
                                 0.0);
      } catch (const ConstraintViolation& e) {
        fail(std::string("generator: ") + e.what());
        break;
      }
      critic.backward(tq, obj.d_q.transpose(), nullptr, &x_grad);
      for (auto& l : gen_grads) {
        l.weight.setZero();
        l.bias.setZero();
      }
      gen.backward(tg, x_grad, &gen_grads, nullptr);
      if (!all_finite(gen_grads)) {
        fail("non-finite generator gradient at step " + std::to_string(step));
        break;
      }
      adam_step(gen_adam, gen.params(), gen_grads);
    }
    res.steps_completed = step + 1;

    GanLogEntry entry{res.steps_completed, last_objective, std::nullopt};
    const bool last = res.steps_completed == cfg.generator_steps;
    if (res.steps_completed % cfg.eval_every == 0 || last) {
      Rng eval_rng(cfg.seed ^ kEvalStream ^ static_cast<std::uint64_t>(res.steps_completed));
      const Eigen::MatrixXd xs = gen.forward(normal_matrix(eval_rng, cfg.noise_dim, cfg.eval_samples));
      if (!xs.allFinite()) {
        fail("non-finite generator output");
        res.log.push_back(entry);
        break;
      }
      entry.coverage = mode_coverage(xs, centres, cover_radius);
      if (centres.cols() > 0 && *entry.coverage >= full && !res.first_full_coverage_step)
        res.first_full_coverage_step = res.steps_completed;
    }
    res.log.push_back(entry);
    if (cfg.stop_at_coverage && res.first_full_coverage_step) break;
  }

  Rng eval_rng(cfg.seed ^ kEvalStream);
  const Eigen::MatrixXd xs = gen.forward(normal_matrix(eval_rng, cfg.noise_dim, cfg.eval_samples));
  if (res.nan_failure || !xs.allFinite()) {
    if (!res.nan_failure) fail("non-finite generator output");
    res.energy_distance = std::numeric_limits<double>::quiet_NaN();
  } else {
    res.mode_coverage = mode_coverage(xs, centres, cover_radius);
    res.energy_distance = energy_distance(xs, cfg.target.sample(eval_rng, cfg.eval_samples));
  }
  res.generator = gen;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

ToyGanExperiment ToyGanExperiment::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("toy_gan: expected an object");
  json base = j;
  if (base.contains("experiment")) {
    if (base["experiment"] != "toy_gan") throw ConfigError("toy_gan: experiment must be toy_gan");
    base.erase("experiment");
  }
  json families = json::array({"ic_wcr"});
  std::vector<std::uint64_t> seeds = {0};
  if (base.contains("families")) {
    families = base["families"];
    base.erase("families");
  }
  if (base.contains("seeds")) {
    try {
      seeds = base["seeds"].get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("toy_gan.seeds: ") + e.what());
    }
    base.erase("seeds");
  }
  if (base.contains("family") || base.contains("seed"))
    throw ConfigError("toy_gan: use 'families' and 'seeds' lists at the top level");
  if (!families.is_array() || families.empty() || seeds.empty())
    throw ConfigError("toy_gan: families and seeds must be nonempty lists");
  ToyGanExperiment e;
  for (std::size_t i = 0; i < families.size(); ++i) {
    const ObjectiveFamily f = parse_gan_family(families[i], "toy_gan.families[" + std::to_string(i) + "]");
    for (auto s : seeds) {
      json one = base;
      one["family"] = gan_family_to_json(f);
      one["seed"] = s;
      e.runs.push_back(GanConfig::from_json(one));
    }
  }
  return e;
}

json ToyGanExperiment::to_json() const {
  if (runs.empty()) return json::object();
  json base = runs.front().to_json();
  base.erase("family");
  base.erase("seed");
  json families = json::array();
  std::vector<std::uint64_t> seeds;
  for (const auto& r : runs) {
    const json f = gan_family_to_json(r.family);
    if (std::find(families.begin(), families.end(), f) == families.end()) families.push_back(f);
    if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
  }
  base["experiment"] = "toy_gan";
  base["families"] = families;
  base["seeds"] = seeds;
  return base;
}

std::string gan_csv(const ToyGanExperiment& exp, const std::vector<GanResult>& results) {
  std::string csv = std::string(kGanCsvHeader) + "\n";
  for (std::size_t i = 0; i < results.size() && i < exp.runs.size(); ++i) {
    const auto& c = exp.runs[i];
    const auto& r = results[i];
    csv += csv_line({gan_family_name(c.family), csv_number(c.family.alpha), std::to_string(c.seed),
                     std::to_string(r.steps_completed), std::to_string(r.mode_coverage), csv_number(r.energy_distance),
                     r.nan_failure ? "1" : "0"});
  }
  return csv;
}

std::vector<GanResult> toy_gan(const ToyGanExperiment& exp, int jobs, const std::string& out_dir) {
  std::vector<GanResult> results(exp.runs.size());
  parallel_for(static_cast<int>(exp.runs.size()), jobs,
               [&](int i) { results[static_cast<std::size_t>(i)] = train_gan(exp.runs[static_cast<std::size_t>(i)]); });
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_config_echo(out_dir, exp.to_json());
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& c = exp.runs[i];
      const auto& r = results[i];
      std::ostringstream stem;
      stem << gan_family_name(c.family);
      if (c.family.alpha) stem << "_a" << csv_number(*c.family.alpha);
      stem << "_seed" << c.seed;
      std::ostringstream log;
      log << "step,critic_objective,mode_coverage\n";
      for (const auto& e : r.log)
        log << e.step << ',' << csv_number(e.critic_objective) << ',' << (e.coverage ? std::to_string(*e.coverage) : "")
            << '\n';
      if (r.nan_failure) log << "# failure: " << r.failure_reason << '\n';
      write_text((dir / "runs" / (stem.str() + ".log.csv")).string(), log.str());
      if (r.generator) save_mlp(*r.generator, (dir / "runs" / (stem.str() + ".generator.json")).string());
    }
    write_text((dir / "results.csv").string(), gan_csv(exp, results));
  }
  return results;
}

}  // namespace icrenyi::experiments
