#pragma once

#include "wornet/nn/model.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace wornet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format stores little-endian floats");

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
  return nlohmann::json{{"layout", cfg.layout},
                        {"stem_channels", cfg.stem_channels},
                        {"input_size", cfg.input_size},
                        {"stem", stem_kind_name(cfg.stem)},
                        {"mode", attention_mode_name(cfg.mode)},
                        {"placement", placement_name(cfg.placement)},
                        {"head_widths", cfg.head_widths},
                        {"dropout", cfg.dropout}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.layout = j.at("layout").get<std::vector<int>>();
  cfg.stem_channels = j.at("stem_channels").get<int>();
  cfg.input_size = j.at("input_size").get<int>();
  cfg.stem = parse_stem_kind(j.at("stem").get<std::string>());
  cfg.mode = parse_attention_mode(j.at("mode").get<std::string>());
  cfg.placement = parse_placement(j.at("placement").get<std::string>());
  cfg.head_widths = j.at("head_widths").get<std::vector<int>>();
  cfg.dropout = j.at("dropout").get<double>();
  validate_config(cfg);
  return cfg;
}

/// Writes `manifest.json` (config + named tensor directory) and `weights.bin`
/// (32-bit little-endian floats, concatenated in manifest order).
template <typename S>
void save_model(Model<S>& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json tensors = nlohmann::json::array();
  std::ofstream bin(dir / "weights.bin", std::ios::binary);
  check(bin.good(), "save_model: cannot open " + (dir / "weights.bin").string());
  uint64_t offset = 0;
  auto dump = [&tensors, &bin, &offset](const std::string& name, Tensor<S>& t) {
    tensors.push_back({{"name", name},
                       {"shape", t.shape},
                       {"offset", offset},
                       {"count", static_cast<uint64_t>(t.numel())}});
    for (Eigen::Index i = 0; i < t.numel(); ++i) {
      const float v = static_cast<float>(t.data[i]);
      bin.write(reinterpret_cast<const char*>(&v), sizeof(float));
    }
    offset += static_cast<uint64_t>(t.numel()) * sizeof(float);
  };
  model.visit_learned(dump);
  model.visit_stats(dump);
  check(bin.good(), "save_model: short write to weights.bin");
  bin.close();

  nlohmann::json manifest{{"format_version", kCheckpointVersion},
                          {"config", config_to_json(model.config)},
                          {"init_seed", model.init_seed},
                          {"tensors", tensors}};
  std::ofstream mf(dir / "manifest.json");
  check(mf.good(), "save_model: cannot open " + (dir / "manifest.json").string());
  mf << manifest.dump(2) << "\n";
  check(mf.good(), "save_model: short write to manifest.json");
}

template <typename S>
Model<S> load_model(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  check(mf.good(), "load_model: cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail("load_model: manifest.json is not valid JSON: " + std::string(e.what()));
  }
  check(manifest.at("format_version").get<int>() == kCheckpointVersion,
        "load_model: unsupported checkpoint format version");
  Model<S> model = assemble_backbone<S>(config_from_json(manifest.at("config")),
                                        manifest.value("init_seed", uint64_t{0}));

  std::map<std::string, Tensor<S>*> bank;
  model.visit_learned([&bank](const std::string& n, Tensor<S>& t) { bank[n] = &t; });
  model.visit_stats([&bank](const std::string& n, Tensor<S>& t) { bank[n] = &t; });

  std::ifstream bin(dir / "weights.bin", std::ios::binary);
  check(bin.good(), "load_model: cannot open " + (dir / "weights.bin").string());
  size_t loaded = 0;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    auto it = bank.find(name);
    check(it != bank.end(), "load_model: checkpoint names unknown tensor " + name);
    Tensor<S>& t = *it->second;
    check(entry.at("shape").get<std::vector<int>>() == t.shape,
          "load_model: shape mismatch for " + name);
    check(entry.at("count").get<uint64_t>() == static_cast<uint64_t>(t.numel()),
          "load_model: count mismatch for " + name);
    bin.seekg(static_cast<std::streamoff>(entry.at("offset").get<uint64_t>()));
    for (Eigen::Index i = 0; i < t.numel(); ++i) {
      float v;
      bin.read(reinterpret_cast<char*>(&v), sizeof(float));
      t.data[i] = static_cast<S>(v);
    }
    check(bin.good(), "load_model: truncated weights.bin at " + name);
    ++loaded;
  }
  check(loaded == bank.size(), "load_model: checkpoint lists " + std::to_string(loaded) +
                                   " tensors, model has " + std::to_string(bank.size()));
  return model;
}

}  // namespace wornet
