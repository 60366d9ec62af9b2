#include "icrenyi/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace icrenyi {

using nlohmann::json;

json mlp_to_json(const Mlp& f) {
  json layers = json::array();
  for (const auto& layer : f.params()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row.push_back(layer.weight(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) bias.push_back(layer.bias[r]);
    layers.push_back({{"weight", std::move(rows)}, {"bias", std::move(bias)}});
  }
  return {{"format", "icrenyi.mlp"},
          {"version", kSnapshotVersion},
          {"layer_sizes", f.layer_sizes()},
          {"hidden_activation", "relu"},
          {"final_layer", to_string(f.final_layer())},
          {"layers", std::move(layers)}};
}

Mlp mlp_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "icrenyi.mlp") throw std::invalid_argument("not an icrenyi.mlp snapshot");
    if (j.at("version").get<int>() != kSnapshotVersion)
      throw std::invalid_argument("unsupported snapshot version " + j.at("version").dump());
    if (j.at("hidden_activation").get<std::string>() != "relu")
      throw std::invalid_argument("unsupported hidden activation");
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const FinalLayer fl = final_layer_from_string(j.at("final_layer").get<std::string>());
    const json& layers = j.at("layers");
    if (sizes.size() < 2 || layers.size() != sizes.size() - 1)
      throw std::invalid_argument("layer count does not match layer_sizes");
    Parameters params;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto rows = layers[l].at("weight").get<std::vector<std::vector<double>>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      const auto out = static_cast<std::size_t>(sizes[l + 1]);
      const auto in = static_cast<std::size_t>(sizes[l]);
      if (rows.size() != out || bias.size() != out) throw std::invalid_argument("layer shape mismatch");
      DenseLayer d{Eigen::MatrixXd(sizes[l + 1], sizes[l]), Eigen::VectorXd(sizes[l + 1])};
      for (std::size_t r = 0; r < out; ++r) {
        if (rows[r].size() != in) throw std::invalid_argument("layer shape mismatch");
        for (std::size_t c = 0; c < in; ++c)
          d.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        d.bias[static_cast<Eigen::Index>(r)] = bias[r];
      }
      params.push_back(std::move(d));
    }
    return Mlp(sizes, fl, std::move(params));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed snapshot: ") + e.what());
  }
}

void save_mlp(const Mlp& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << mlp_to_json(f).dump(1) << '\n';
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return mlp_from_json(j);
}

json estimate_to_json(const EstimateResult& r) {
  json j = {{"estimate", r.estimate ? json(*r.estimate) : json(nullptr)},
            {"trace", r.trace},
            {"nan_failure", r.nan_failure},
            {"seed", r.seed},
            {"wall_seconds", r.wall_seconds}};
  if (!r.failure_reason.empty()) j["failure_reason"] = r.failure_reason;
  if (r.trace_flag) j["trace_flag"] = true;
  return j;
}

EstimateResult estimate_from_json(const json& j) {
  EstimateResult r;
  try {
    if (!j.at("estimate").is_null()) r.estimate = j.at("estimate").get<double>();
    r.trace = j.at("trace").get<std::vector<double>>();
    r.nan_failure = j.at("nan_failure").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.failure_reason = j.value("failure_reason", std::string{});
    r.trace_flag = j.value("trace_flag", false);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed estimate record: ") + e.what());
  }
  return r;
}

}  // namespace icrenyi
