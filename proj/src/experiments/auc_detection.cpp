#include "icrenyi/experiments/auc_detection.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "icrenyi/experiments/auc.hpp"
#include "icrenyi/experiments/output.hpp"
#include "icrenyi/experiments/parallel.hpp"
#include "icrenyi/serialize.hpp"

namespace icrenyi::experiments {

RarePopulation::RarePopulation(int dim, int components, double spread, double shift, std::uint64_t seed) {
  if (dim < 1 || components < 1) throw std::invalid_argument("population needs dim >= 1 and components >= 1");
  Rng rng(seed);
  means_.resize(dim, components);
  for (Eigen::Index i = 0; i < means_.size(); ++i) means_.data()[i] = rng.normal(0.0, spread);
  Eigen::VectorXd u(dim);
  for (int i = 0; i < dim; ++i) u[i] = rng.normal();
  rare_mean_ = means_.col(0) + shift * u.normalized();
}

SampleSet RarePopulation::draw(Rng& rng, int n, double rho) const {
  SampleSet s;
  s.points.resize(dim(), n);
  const auto k = static_cast<std::uint64_t>(means_.cols());
  for (int j = 0; j < n; ++j) {
    const bool rare = rho > 0.0 && rng.uniform() < rho;
    if (rare)
      s.points.col(j) = rare_mean_;
    else
      s.points.col(j) = means_.col(static_cast<Eigen::Index>(rng.index(k)));
    for (int i = 0; i < dim(); ++i) s.points(i, j) += rng.normal();
  }
  return s;
}

TrainConfig AucDetectionConfig::default_train() {
  TrainConfig t;
  t.epochs = 1000;
  t.minibatch = 500;
  t.learning_rate = 1e-3;
  t.estimate_window = 100;
  return t;
}

AucDetectionConfig AucDetectionConfig::from_json(const json& j) {
  AucDetectionConfig c;
  KeyReader r(j, "auc_detection");
  if (r.has("experiment") && r.required<std::string>("experiment") != "auc_detection")
    throw ConfigError("auc_detection: experiment must be auc_detection");
  if (r.has("families")) {
    c.families.clear();
    const json& fams = r.sub("families");
    if (!fams.is_array()) throw ConfigError("auc_detection.families must be a list");
    for (std::size_t i = 0; i < fams.size(); ++i)
      c.families.push_back(parse_family(fams[i], "auc_detection.families[" + std::to_string(i) + "]"));
  }
  c.rho = r.get("rho", c.rho);
  c.sample_sizes = r.get("sample_sizes", c.sample_sizes);
  c.pairs = r.get("pairs", c.pairs);
  c.dim = r.get("dim", c.dim);
  c.components = r.get("components", c.components);
  c.spread = r.get("spread", c.spread);
  c.shift = r.get("shift", c.shift);
  c.population_seed = r.get("population_seed", c.population_seed);
  if (r.has("net")) c.net = parse_net(r.sub("net"), "auc_detection.net", c.net);
  if (r.has("train")) c.train = parse_train(r.sub("train"), "auc_detection.train", c.train);
  r.finish();
  c.validate();
  return c;
}

json AucDetectionConfig::to_json() const {
  json fams = json::array();
  for (const auto& f : families) fams.push_back(family_to_json(f));
  return {{"experiment", "auc_detection"},
          {"families", fams},
          {"rho", rho},
          {"sample_sizes", sample_sizes},
          {"pairs", pairs},
          {"dim", dim},
          {"components", components},
          {"spread", spread},
          {"shift", shift},
          {"population_seed", population_seed},
          {"net", net_to_json(net)},
          {"train", train_to_json(train)}};
}

void AucDetectionConfig::validate() const {
  if (families.empty()) throw ConfigError("auc_detection: no families");
  for (const auto& f : families) {
    NetConfig n = net;
    if (!f.negative_class()) n.final_layer = FinalLayer::identity;
    try {
      validate_family_net(f, n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("auc_detection: ") + e.what());
    }
  }
  if (rho.empty() || sample_sizes.empty()) throw ConfigError("auc_detection: empty rho or sample_sizes");
  require_ascending(rho, "auc_detection.rho");
  // rho = 0 is the no-signal control.
  for (double v : rho)
    if (!(v >= 0.0 && v < 1.0)) throw ConfigError("auc_detection.rho: contamination must lie in [0, 1)");
  for (int n : sample_sizes)
    if (n < train.minibatch) throw ConfigError("auc_detection: sample size below minibatch");
  if (pairs < 1) throw ConfigError("auc_detection.pairs must be positive");
  if (dim < 1 || components < 1) throw ConfigError("auc_detection: dim and components must be positive");
  if (!(shift >= 0.0) || !(spread >= 0.0)) throw ConfigError("auc_detection: shift and spread must be >= 0");
}

std::vector<AucRow> auc_detection(const AucDetectionConfig& cfg, int jobs, const std::string& out_dir) {
  cfg.validate();
  const RarePopulation pop(cfg.dim, cfg.components, cfg.spread, cfg.shift, cfg.population_seed);

  struct Cell {
    ObjectiveFamily family;
    double rho;
    int n;
  };
  std::vector<Cell> cells;
  for (const auto& f : cfg.families)
    for (double rho : cfg.rho)
      for (int n : cfg.sample_sizes) cells.push_back({f, rho, n});

  // One job per training run: cell c, run k; k < pairs are negatives.
  const int per_cell = 2 * cfg.pairs;
  std::vector<EstimateResult> runs(cells.size() * static_cast<std::size_t>(per_cell));
  parallel_for(static_cast<int>(runs.size()), jobs, [&](int job) {
    const Cell& c = cells[static_cast<std::size_t>(job / per_cell)];
    const int k = job % per_cell;
    const bool positive = k >= cfg.pairs;
    TrainConfig t = cfg.train;
    t.seed = cfg.train.seed + static_cast<std::uint64_t>(k);
    Rng data(t.seed);
    const SampleSet test = pop.draw(data, c.n, positive ? c.rho : 0.0);
    const SampleSet reference = pop.draw(data, c.n, 0.0);
    NetConfig net = cfg.net;
    if (!c.family.negative_class()) net.final_layer = FinalLayer::identity;
    runs[static_cast<std::size_t>(job)] = estimate_divergence(test, reference, c.family, net, t);
  });

  std::vector<AucRow> rows;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    AucRow row{cells[ci].family, cells[ci].rho, cells[ci].n, 0.0, {}, {}, 0};
    for (int k = 0; k < per_cell; ++k) {
      const auto& r = runs[ci * static_cast<std::size_t>(per_cell) + static_cast<std::size_t>(k)];
      if (!r.estimate) {
        ++row.n_failed;
        continue;
      }
      (k >= cfg.pairs ? row.positives : row.negatives).push_back(*r.estimate);
    }
    row.auc = row.positives.empty() || row.negatives.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                             : auc_rank(row.positives, row.negatives);
    rows.push_back(std::move(row));
  }

  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_config_echo(out_dir, cfg.to_json());
    write_text((dir / "results.csv").string(), auc_csv(rows));
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      for (int k = 0; k < per_cell; ++k) {
        const auto& r = runs[ci * static_cast<std::size_t>(per_cell) + static_cast<std::size_t>(k)];
        std::ostringstream name;
        name << icrenyi::to_string(cells[ci].family.tag) << "_a" << csv_number(cells[ci].family.alpha) << "_rho"
             << csv_number(cells[ci].rho) << "_n" << cells[ci].n << (k >= cfg.pairs ? "_pos" : "_neg") << "_seed"
             << r.seed << ".json";
        write_text((dir / "runs" / name.str()).string(), estimate_to_json(r).dump() + "\n");
      }
  }
  return rows;
}

std::string auc_csv(const std::vector<AucRow>& rows) {
  std::string out = std::string(kAucCsvHeader) + "\n";
  for (const auto& r : rows)
    out += csv_line({icrenyi::to_string(r.family.tag), csv_number(r.family.alpha), csv_number(r.rho),
                     std::to_string(r.sample_size), csv_number(r.auc)});
  return out;
}

}  // namespace icrenyi::experiments
