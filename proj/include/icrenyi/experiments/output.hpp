#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace icrenyi::experiments {

/// Creates `dir` and `dir/runs` if needed.
void prepare_output_dir(const std::string& dir);
void write_text(const std::string& path, const std::string& text);
/// Writes `dir/config.echo`: the effective configuration, re-runnable as is.
void write_config_echo(const std::string& dir, const nlohmann::json& config);

/// Round-trip formatting for CSV cells; empty for an absent value.
std::string csv_number(double v);
std::string csv_number(const std::optional<double>& v);
std::string csv_line(const std::vector<std::string>& cells);

}  // namespace icrenyi::experiments
