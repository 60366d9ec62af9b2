#pragma once

// JSON records for network snapshots and estimator results.
//
// Snapshot layout (text, so byte order never matters):
//   {"format": "icrenyi.mlp", "version": 1, "layer_sizes": [...],
//    "hidden_activation": "relu", "final_layer": "...",
//    "layers": [{"weight": [[row], ...], "bias": [...]}, ...]}
// Doubles are written with round-trip precision.

#include <json.hpp>
#include <string>

#include "icrenyi/estimator.hpp"
#include "icrenyi/mlp.hpp"

namespace icrenyi {

inline constexpr int kSnapshotVersion = 1;

nlohmann::json mlp_to_json(const Mlp& f);
/// Throws std::invalid_argument on a malformed or mismatched snapshot.
Mlp mlp_from_json(const nlohmann::json& j);

void save_mlp(const Mlp& f, const std::string& path);
Mlp load_mlp(const std::string& path);

nlohmann::json estimate_to_json(const EstimateResult& r);
EstimateResult estimate_from_json(const nlohmann::json& j);

}  // namespace icrenyi
