#include "icrenyi/experiments/config.hpp"

#include <fstream>

namespace icrenyi::experiments {

KeyReader::KeyReader(const json& j, std::string where) : obj_(j), where_(std::move(where)) {
  if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
}

const json& KeyReader::sub(const std::string& key) {
  used_.insert(key);
  if (!obj_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
  return obj_.at(key);
}

void KeyReader::finish() const {
  for (const auto& item : obj_.items())
    if (!used_.count(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
}

ObjectiveFamily parse_family(const json& j, const std::string& where) {
  ObjectiveFamily f;
  try {
    if (j.is_string()) {
      f.tag = objective_tag_from_string(j.get<std::string>());
    } else {
      KeyReader r(j, where);
      f.tag = objective_tag_from_string(r.required<std::string>("family"));
      if (r.has("alpha")) f.alpha = r.required<double>("alpha");
      r.finish();
    }
    f.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return f;
}

json family_to_json(const ObjectiveFamily& f) {
  if (!f.alpha) return to_string(f.tag);
  return {{"family", to_string(f.tag)}, {"alpha", *f.alpha}};
}

NetConfig parse_net(const json& j, const std::string& where, const NetConfig& defaults) {
  KeyReader r(j, where);
  NetConfig n = defaults;
  n.hidden = r.get("hidden", n.hidden);
  try {
    n.final_layer = final_layer_from_string(r.get("final_layer", to_string(n.final_layer)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ".final_layer: " + e.what());
  }
  r.finish();
  for (int w : n.hidden)
    if (w <= 0) throw ConfigError(where + ".hidden: widths must be positive");
  return n;
}

json net_to_json(const NetConfig& n) { return {{"hidden", n.hidden}, {"final_layer", to_string(n.final_layer)}}; }

PenaltySpec parse_penalty(const json& j, const std::string& where, const PenaltySpec& defaults) {
  KeyReader r(j, where);
  PenaltySpec p = defaults;
  p.weight = r.get("weight", p.weight);
  p.lipschitz = r.get("lipschitz", p.lipschitz);
  const auto sampling = r.get<std::string>(
      "sampling", p.sampling == PenaltySampling::interpolates ? "interpolates" : "data_points");
  if (sampling == "interpolates")
    p.sampling = PenaltySampling::interpolates;
  else if (sampling == "data_points")
    p.sampling = PenaltySampling::data_points;
  else
    throw ConfigError(where + ".sampling: expected interpolates or data_points");
  r.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

json penalty_to_json(const PenaltySpec& p) {
  return {{"weight", p.weight},
          {"lipschitz", p.lipschitz},
          {"sampling", p.sampling == PenaltySampling::interpolates ? "interpolates" : "data_points"}};
}

TrainConfig parse_train(const json& j, const std::string& where, const TrainConfig& defaults) {
  KeyReader r(j, where);
  TrainConfig t = defaults;
  t.epochs = r.get("epochs", t.epochs);
  t.minibatch = r.get("minibatch", t.minibatch);
  t.learning_rate = r.get("learning_rate", t.learning_rate);
  t.seed = r.get("seed", t.seed);
  t.estimate_window = r.get("estimate_window", t.estimate_window);
  try {
    t.eval_mode = eval_mode_from_string(r.get("eval_mode", to_string(t.eval_mode)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ".eval_mode: " + e.what());
  }
  t.beta1 = r.get("beta1", t.beta1);
  t.beta2 = r.get("beta2", t.beta2);
  t.adam_epsilon = r.get("adam_epsilon", t.adam_epsilon);
  if (r.has("penalty")) t.penalty = parse_penalty(r.sub("penalty"), where + ".penalty", t.penalty);
  r.finish();
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return t;
}

json train_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"minibatch", t.minibatch},
          {"learning_rate", t.learning_rate},
          {"seed", t.seed},
          {"estimate_window", t.estimate_window},
          {"eval_mode", to_string(t.eval_mode)},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_epsilon", t.adam_epsilon},
          {"penalty", penalty_to_json(t.penalty)}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void require_ascending(const std::vector<double>& v, const std::string& where) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ConfigError(where + " must be sorted ascending");
}

}  // namespace icrenyi::experiments
