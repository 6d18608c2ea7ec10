#pragma once

#include <filesystem>

#include <json.hpp>

#include <wornet/data/synth.hpp>
#include <wornet/nn/model.hpp>
#include <wornet/train/trainer.hpp>

namespace wornet {

inline constexpr int kRunConfigVersion = 1;

/// One JSON document covering the model, the optimizer, and the generator.
/// Parsing is strict: unknown keys are rejected at every level; missing keys
/// take the documented defaults.
struct RunConfig {
  ModelConfig model;
  TrainConfig trainer;
  GenConfig generator;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace wornet
