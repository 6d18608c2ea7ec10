#include "wornet/config.hpp"

#include <fstream>

#include "wornet/data/dataset.hpp"
#include "wornet/nn/checkpoint.hpp"

namespace wornet {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  check(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const std::string& k : known) ok = ok || k == key;
    check(ok, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"format_version", "model", "trainer", "generator"}, "the run config");
  int version = kRunConfigVersion;
  read_key(j, "format_version", version);
  check(version == kRunConfigVersion,
        "unsupported run config version " + std::to_string(version));

  RunConfig cfg;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown_keys(m,
                        {"layout", "stem_channels", "input_size", "stem", "mode", "placement",
                         "head_widths", "dropout"},
                        "the model section");
    // Missing keys keep the defaults; present keys are parsed strictly.
    nlohmann::json full = config_to_json(cfg.model);
    full.update(m);
    cfg.model = config_from_json(full);
  }
  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    reject_unknown_keys(
        t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "eps", "seed"},
        "the trainer section");
    read_key(t, "epochs", cfg.trainer.epochs);
    read_key(t, "batch_size", cfg.trainer.batch_size);
    read_key(t, "learning_rate", cfg.trainer.learning_rate);
    read_key(t, "beta1", cfg.trainer.beta1);
    read_key(t, "beta2", cfg.trainer.beta2);
    read_key(t, "eps", cfg.trainer.eps);
    read_key(t, "seed", cfg.trainer.seed);
  }
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    reject_unknown_keys(g, {"image_size", "unworn_ratio", "val_fraction", "folds", "min_overlap"},
                        "the generator section");
    nlohmann::json full = gen_config_to_json(cfg.generator);
    full.update(g);
    cfg.generator = gen_config_from_json(full);
  }
  validate_config(cfg.model);
  validate_config(cfg.trainer);
  validate_config(cfg.generator);
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  return {{"format_version", kRunConfigVersion},
          {"model", config_to_json(cfg.model)},
          {"trainer",
           {{"epochs", cfg.trainer.epochs},
            {"batch_size", cfg.trainer.batch_size},
            {"learning_rate", cfg.trainer.learning_rate},
            {"beta1", cfg.trainer.beta1},
            {"beta2", cfg.trainer.beta2},
            {"eps", cfg.trainer.eps},
            {"seed", cfg.trainer.seed}}},
          {"generator", gen_config_to_json(cfg.generator)}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), "run config not found: " + path.string());
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail("run config " + path.string() + " is malformed: " + std::string(e.what()));
  }
}

}  // namespace wornet
