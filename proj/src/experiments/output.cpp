#include "icrenyi/experiments/output.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icrenyi::experiments {

void prepare_output_dir(const std::string& dir) {
  std::filesystem::create_directories(std::filesystem::path(dir) / "runs");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_config_echo(const std::string& dir, const nlohmann::json& config) {
  write_text((std::filesystem::path(dir) / "config.echo").string(), config.dump(2) + "\n");
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string csv_number(const std::optional<double>& v) { return v ? csv_number(*v) : std::string{}; }

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + "\n";
}

}  // namespace icrenyi::experiments
