#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pshape/models.hpp"

namespace pshape {

// Training-loop hyperparameters; everything needed to reproduce a run.
struct TrainConfig {
  int epochs = 100;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::uint64_t seed = 1;
  int patience = 20;

  void validate() const;
};

// Data-handling options resolved from the run configuration.
struct DataConfig {
  bool normalize_inputs = true;
  std::array<double, 3> split_ratios{0.7, 0.15, 0.15};
  std::uint64_t split_seed = 1;
  std::string reference_cloud;  // per-structure template paths, ';'-separated; empty = first train sample
};

// Full run configuration: model architecture + training + data handling.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& c);

// Parses and validates a run configuration document. Unknown keys are
// rejected with a ConfigError naming the offending path.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

// Applies a `key.path=value` override (values parsed as JSON scalars, with
// bare words treated as strings) onto a configuration document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Architecture equality for checkpoint/run-config conflict detection.
bool same_architecture(const ModelConfig& a, const ModelConfig& b);

}  // namespace pshape
