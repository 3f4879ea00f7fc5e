#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mcpr/model.hpp"

namespace mcpr::io {

// Shortest round-trip decimal form of a double ("0.1", not "0.10000...01").
// All file formats use this so that identical values always produce
// identical bytes.
std::string format_double(double x);

// Parses a double/integer, throwing std::invalid_argument with the offending
// token on failure.
double parse_double(const std::string& token);
std::int64_t parse_int(const std::string& token);

// Model file format
//   line 1:  m r K b epsilon seed
//   lines:   <user_id> <cluster_label>          (n lines)
//   line:    scores
//   lines:   <cluster_id> <theta_1> ... <theta_m>  (r lines)
//
// Dataset file format
//   line 1:  m r K b epsilon seed
//   lines:   <user_id> <i> <j> <outcome>        (one per record, outcome +-1)
//
// Both carry the generating config in the header so a run can recover n
// and epsilon without a side channel.
void write_model(std::ostream& os, const model::SimulationConfig& config,
                 const model::ClusterModel& model);
void write_dataset(std::ostream& os, const model::SimulationConfig& config,
                   const model::ComparisonDataset& dataset);

struct LoadedModel {
  model::SimulationConfig config;
  model::ClusterModel model;
};
struct LoadedDataset {
  model::SimulationConfig config;
  model::ComparisonDataset dataset;
};

LoadedModel read_model(std::istream& is);
LoadedDataset read_dataset(std::istream& is);

// File-path convenience wrappers; throw std::runtime_error on I/O failure.
void save_model(const std::string& path, const model::SimulationConfig& config,
                const model::ClusterModel& model);
void save_dataset(const std::string& path, const model::SimulationConfig& config,
                  const model::ComparisonDataset& dataset);
LoadedModel load_model(const std::string& path);
LoadedDataset load_dataset(const std::string& path);

}  // namespace mcpr::io
