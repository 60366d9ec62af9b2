#include "icrenyi/experiments/variance_study.hpp"

#include <filesystem>
#include <limits>
#include <sstream>

#include "icrenyi/analytic.hpp"
#include "icrenyi/experiments/output.hpp"
#include "icrenyi/experiments/parallel.hpp"
#include "icrenyi/serialize.hpp"

namespace icrenyi::experiments {

namespace {

bool is_wcr(ObjectiveTag t) { return t == ObjectiveTag::cc_wcr; }

SampleSet gaussian_sample(Rng& rng, int n, double mean, double sd) {
  SampleSet s;
  s.points.resize(1, n);
  for (int i = 0; i < n; ++i) s.points(0, i) = rng.normal(mean, sd);
  return s;
}

}  // namespace

VarianceStudyConfig VarianceStudyConfig::from_json(const json& j) {
  VarianceStudyConfig c;
  KeyReader r(j, "variance_study");
  if (r.has("experiment") && r.required<std::string>("experiment") != "variance_study")
    throw ConfigError("variance_study: experiment must be variance_study");
  if (r.has("families")) {
    c.families.clear();
    for (const auto& name : r.required<std::vector<std::string>>("families")) {
      ObjectiveTag t;
      try {
        t = objective_tag_from_string(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("variance_study.families: ") + e.what());
      }
      c.families.push_back(t);
    }
  }
  // WCR has no finite reference here, so an MSE request for it is an error.
  if (r.has("mse_families"))
    for (const auto& name : r.required<std::vector<std::string>>("mse_families"))
      if (name == "cc_wcr" || name == "ic_wcr" || name == "dv_wcr")
        throw ConfigError("variance_study.mse_families: the exact WCR divergence is infinite for Gaussians "
                          "with different means; " + name + " cannot report MSE");
  c.alphas = r.get("alphas", c.alphas);
  c.mu_q = r.get("mu_q", c.mu_q);
  c.mu_p = r.get("mu_p", c.mu_p);
  c.sigma = r.get("sigma", c.sigma);
  c.sample_size = r.get("sample_size", c.sample_size);
  c.replicates = r.get("replicates", c.replicates);
  if (r.has("net")) c.net = parse_net(r.sub("net"), "variance_study.net", c.net);
  if (r.has("train")) c.train = parse_train(r.sub("train"), "variance_study.train", c.train);
  r.finish();
  c.validate();
  return c;
}

json VarianceStudyConfig::to_json() const {
  std::vector<std::string> fam;
  for (auto t : families) fam.push_back(icrenyi::to_string(t));
  return {{"experiment", "variance_study"}, {"families", fam},   {"alphas", alphas},
          {"mu_q", mu_q},                   {"mu_p", mu_p},      {"sigma", sigma},
          {"sample_size", sample_size},     {"replicates", replicates}, {"net", net_to_json(net)},
          {"train", train_to_json(train)}};
}

void VarianceStudyConfig::validate() const {
  if (families.empty()) throw ConfigError("variance_study: no families");
  for (auto t : families)
    if (t != ObjectiveTag::dv_renyi && t != ObjectiveTag::cc_renyi && t != ObjectiveTag::cc_wcr)
      throw ConfigError("variance_study: family " + icrenyi::to_string(t) +
                        " is not one of dv_renyi, cc_renyi, cc_wcr");
  if (alphas.empty() || mu_q.empty()) throw ConfigError("variance_study: empty alpha or mu_q grid");
  require_ascending(alphas, "variance_study.alphas");
  for (double a : alphas)
    if (!(a > 0.0) || a == 1.0) throw ConfigError("variance_study.alphas: alpha must be in (0,1) or (1,inf)");
  if (!(sigma > 0.0)) throw ConfigError("variance_study.sigma must be positive");
  if (sample_size < 1 || replicates < 2) throw ConfigError("variance_study: need sample_size >= 1, replicates >= 2");
  if (train.minibatch > sample_size) throw ConfigError("variance_study: minibatch exceeds sample_size");
  if (net.final_layer == FinalLayer::identity)
    throw ConfigError("variance_study.net.final_layer must be neg_abs or poly_softplus");
}

ReplicateSummary variance_cell(const VarianceStudyConfig& cfg, const ObjectiveFamily& family, double mu_q,
                               std::optional<double> reference, int jobs) {
  ReplicateSpec spec;
  const int n = cfg.sample_size;
  const double mu_p = cfg.mu_p, sd = cfg.sigma;
  spec.draw_p = [=](Rng& r) { return gaussian_sample(r, n, mu_p, sd); };
  spec.draw_q = [=](Rng& r) { return gaussian_sample(r, n, mu_q, sd); };
  spec.family = family;
  spec.net = cfg.net;
  if (!family.negative_class()) spec.net.final_layer = FinalLayer::identity;
  spec.train = cfg.train;
  spec.reference = reference;
  return run_replicates(spec, cfg.replicates, jobs);
}

VarianceStudyResult variance_study(const VarianceStudyConfig& cfg, int jobs, const std::string& out_dir) {
  cfg.validate();
  struct Cell {
    ObjectiveFamily family;
    double mu_q;
  };
  std::vector<Cell> cells;
  for (auto t : cfg.families)
    for (std::size_t k = 0; k < (is_wcr(t) ? 1 : cfg.alphas.size()); ++k)
      for (double mu : cfg.mu_q) {
        ObjectiveFamily f{t, is_wcr(t) ? std::nullopt : std::optional<double>(cfg.alphas[k])};
        cells.push_back({f, mu});
      }
  VarianceStudyResult res;
  res.rows.resize(cells.size());
  res.runs.resize(cells.size());
  parallel_for(static_cast<int>(cells.size()), jobs, [&](int i) {
    const Cell& c = cells[static_cast<std::size_t>(i)];
    std::optional<double> ref;
    if (!is_wcr(c.family.tag)) ref = renyi_gaussian_1d(cfg.mu_p, c.mu_q, cfg.sigma, *c.family.alpha);
    VarianceRow row{c.family.tag, c.family.alpha, c.mu_q, 0, 0, std::nullopt, 1.0, cfg.replicates, cfg.replicates};
    try {
      const auto s = variance_cell(cfg, c.family, c.mu_q, ref, 1);
      row.mean = s.mean;
      row.variance = s.variance;
      if (ref) row.mse = s.mse;
      row.failure_rate = s.failure_rate;
      row.n_failed = s.n_failed;
      res.runs[static_cast<std::size_t>(i)] = s.runs;
    } catch (const AllRunsFailed&) {
      row.mean = row.variance = std::numeric_limits<double>::quiet_NaN();
    }
    res.rows[static_cast<std::size_t>(i)] = row;
  });

  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_config_echo(out_dir, cfg.to_json());
    write_text((dir / "results.csv").string(), variance_csv(res));
    // gnuplot layout: one block per (family, alpha), blocks separated by two blank lines.
    std::ostringstream dat;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
      const auto& r = res.rows[i];
      if (i == 0 || r.family != res.rows[i - 1].family || r.alpha != res.rows[i - 1].alpha) {
        if (i) dat << "\n\n";
        dat << "# " << icrenyi::to_string(r.family) << " alpha=" << csv_number(r.alpha)
            << "\n# mu_q mean variance mse failure_rate\n";
      }
      dat << csv_number(r.mu_q) << ' ' << csv_number(r.mean) << ' ' << csv_number(r.variance) << ' '
          << (r.mse ? csv_number(*r.mse) : "nan") << ' ' << csv_number(r.failure_rate) << '\n';
    }
    write_text((dir / "results.dat").string(), dat.str());
    for (std::size_t i = 0; i < res.rows.size(); ++i)
      for (const auto& run : res.runs[i]) {
        std::ostringstream name;
        name << icrenyi::to_string(res.rows[i].family) << "_a" << csv_number(res.rows[i].alpha) << "_mu"
             << csv_number(res.rows[i].mu_q) << "_seed" << run.seed << ".json";
        write_text((dir / "runs" / name.str()).string(), estimate_to_json(run).dump() + "\n");
      }
  }
  return res;
}

std::string variance_csv(const VarianceStudyResult& r) {
  std::string out = std::string(kVarianceCsvHeader) + "\n";
  for (const auto& row : r.rows)
    out += csv_line({icrenyi::to_string(row.family), csv_number(row.alpha), csv_number(row.mu_q), csv_number(row.mean),
                     csv_number(row.variance), csv_number(row.mse), csv_number(row.failure_rate)});
  return out;
}

}  // namespace icrenyi::experiments
