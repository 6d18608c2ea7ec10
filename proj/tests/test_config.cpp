#include <doctest.h>

#include <wornet/config.hpp>
#include <wornet/nn/checkpoint.hpp>

#include <fstream>

#include "support/test_utils.hpp"

using namespace wornet;
using nlohmann::json;

TEST_CASE("empty document yields the default run config") {
  const RunConfig cfg = run_config_from_json(json::object());
  const RunConfig def;
  CHECK(config_to_json(cfg.model) == config_to_json(def.model));
  CHECK(cfg.trainer == def.trainer);
  CHECK(cfg.generator == def.generator);
}

TEST_CASE("partial sections keep defaults for the keys left out") {
  const json j = {{"model", {{"stem_channels", 8}}},
                  {"trainer", {{"epochs", 3}, {"seed", 42}}},
                  {"generator", {{"image_size", 32}}}};
  const RunConfig cfg = run_config_from_json(j);
  const RunConfig def;
  CHECK(cfg.model.stem_channels == 8);
  CHECK(cfg.model.layout == def.model.layout);
  CHECK(cfg.model.mode == def.model.mode);
  CHECK(cfg.trainer.epochs == 3);
  CHECK(cfg.trainer.seed == 42);
  CHECK(cfg.trainer.learning_rate == def.trainer.learning_rate);
  CHECK(cfg.generator.image_size == 32);
  CHECK(cfg.generator.unworn_ratio == def.generator.unworn_ratio);
}

TEST_CASE("round trip through json is exact") {
  RunConfig cfg;
  cfg.model.stem_channels = 12;
  cfg.model.layout = {2, 1, 1};
  cfg.model.mode = AttentionMode::hard;
  cfg.trainer.learning_rate = 0.003;
  cfg.trainer.epochs = 17;
  cfg.generator.unworn_ratio = 0.25;
  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(config_to_json(back.model) == config_to_json(cfg.model));
  CHECK(back.trainer == cfg.trainer);
  CHECK(back.generator == cfg.generator);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(run_config_from_json({{"modell", json::object()}}),
                       doctest::Contains("unknown key 'modell'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(run_config_from_json({{"model", {{"head_hidden", {16}}}}}),
                       doctest::Contains("unknown key 'head_hidden'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(run_config_from_json({{"trainer", {{"lr", 0.1}}}}),
                       doctest::Contains("unknown key 'lr'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(run_config_from_json({{"generator", {{"size", 64}}}}),
                       doctest::Contains("unknown key 'size'"), std::invalid_argument);
}

TEST_CASE("sections must be objects") {
  CHECK_THROWS_AS(run_config_from_json({{"model", 5}}), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json::array()), std::invalid_argument);
}

TEST_CASE("future format versions are refused") {
  CHECK_THROWS_WITH_AS(run_config_from_json({{"format_version", 2}}),
                       doctest::Contains("unsupported run config version 2"),
                       std::invalid_argument);
}

TEST_CASE("invalid values fail the same validation as the typed configs") {
  CHECK_THROWS_AS(run_config_from_json({{"trainer", {{"epochs", 0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json({{"generator", {{"unworn_ratio", 0.7}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json({{"model", {{"mode", "fuzzy"}}}}), std::invalid_argument);
}

TEST_CASE("load_run_config reads a file and reports malformed input") {
  testsupport::TempDir dir("runcfg");
  const auto good = dir.path() / "run.json";
  {
    std::ofstream out(good);
    out << R"({"format_version": 1, "trainer": {"epochs": 9}})";
  }
  CHECK(load_run_config(good).trainer.epochs == 9);

  const auto bad = dir.path() / "broken.json";
  {
    std::ofstream out(bad);
    out << "{\"trainer\": ";
  }
  CHECK_THROWS_WITH_AS(load_run_config(bad), doctest::Contains("malformed"),
                       std::invalid_argument);
  CHECK_THROWS_AS(load_run_config(dir.path() / "absent.json"), std::invalid_argument);
}
