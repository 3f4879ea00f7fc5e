#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcpr/experiments.hpp"
#include "mcpr/model.hpp"
#include "mcpr/pipeline.hpp"

namespace mcpr::cli {

// Flat key=value file with [section] headers. '#' starts a comment.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config(const std::string& path);

// Everything a command can be asked to do, validated up front.
// Unknown keys are rejected so typos fail loudly.
struct RunConfig {
  model::SimulationConfig simulation;
  pipeline::PipelineParams params;
  pipeline::AngleGrid fig1;
  pipeline::FrontierGrid fig2;
  pipeline::ScoreErrorGrid fig3;
  int threads = 1;

  bool operator==(const RunConfig& other) const;
};

// Builds a RunConfig from a parsed file; throws std::invalid_argument with
// a field-level message ("[section] key: problem") on any bad value.
RunConfig make_run_config(const ConfigMap& map);

// Inverse of make_run_config: emitting and re-parsing yields an equal
// RunConfig (and byte-identical re-emission).
std::string emit_config(const RunConfig& config);

}  // namespace mcpr::cli
