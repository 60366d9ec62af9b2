#pragma once

// JSON configuration helpers. Every reader rejects keys it does not know,
// so a typo in a config file is an error rather than a silent default.

#include <json.hpp>
#include <set>
#include <stdexcept>
#include <string>

#include "icrenyi/estimator.hpp"
#include "icrenyi/objectives.hpp"

namespace icrenyi::experiments {

using nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reads fields of one JSON object and tracks which keys were consumed.
class KeyReader {
 public:
  KeyReader(const json& j, std::string where);

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!obj_.contains(key)) return fallback;
    return required<T>(key);
  }

  template <class T>
  T required(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }
  /// Raw sub-object access; marks the key as used.
  const json& sub(const std::string& key);
  [[nodiscard]] const std::string& where() const { return where_; }

  /// Throws ConfigError naming the first unconsumed key.
  void finish() const;

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

/// "cc_wcr" or {"family": "cc_renyi", "alpha": 2}.
ObjectiveFamily parse_family(const json& j, const std::string& where);
json family_to_json(const ObjectiveFamily& f);

NetConfig parse_net(const json& j, const std::string& where, const NetConfig& defaults = {});
json net_to_json(const NetConfig& n);

PenaltySpec parse_penalty(const json& j, const std::string& where, const PenaltySpec& defaults = {});
json penalty_to_json(const PenaltySpec& p);

TrainConfig parse_train(const json& j, const std::string& where, const TrainConfig& defaults = {});
json train_to_json(const TrainConfig& t);

/// Parses a file, throwing ConfigError with the path on failure.
json load_json_file(const std::string& path);

/// Throws ConfigError unless values are strictly ascending.
void require_ascending(const std::vector<double>& v, const std::string& where);

}  // namespace icrenyi::experiments
