#pragma once

#include <string>

#include "subexp/harness.hpp"

namespace subexp {

// YAML experiment documents; see README for the schema.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
std::string canonical_config_text(const ExperimentConfig& cfg);

// One vertex per line, whitespace-separated decimals; returns vertices as columns.
MatrixXd read_vertex_file(const std::string& path);

}  // namespace subexp
