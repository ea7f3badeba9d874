#include <gtest/gtest.h>

#include <cstdlib>

#include "helpers.hpp"
#include "tabprompt/config.hpp"
#include "tabprompt/errors.hpp"

using namespace tabprompt;
using tabprompt::testing::scratch_dir;
using tabprompt::testing::write_file;

namespace {

const char* kMinimal = R"({"dataset": {"path": "data.csv"}, "task": {"kind": "DI", "target": "Price"}})";

std::string field_of(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, MinimalFileTakesDefaults) {
  const RunConfig c = config_from_json(kMinimal);
  EXPECT_EQ(c.dataset.path, "data.csv");
  EXPECT_EQ(c.task.target, "Price");
  EXPECT_EQ(c.k_fewshot, 3u);
  EXPECT_EQ(c.conditions.size(), 5u);
  EXPECT_EQ(c.train.gamma, TrainConfig{}.gamma);
  EXPECT_EQ(c.train.episodes, TrainConfig{}.episodes);
}

TEST(Config, CanonicalFormIsAFixedPoint) {
  const std::string once = config_to_json(config_from_json(kMinimal));
  const std::string twice = config_to_json(config_from_json(once));
  EXPECT_EQ(once, twice);
}

TEST(Config, ShippedExampleParses) {
  const RunConfig c = load_config(tabprompt::testing::fixture("../../configs/synthetic_di.json"));
  EXPECT_EQ(c.oracle.informative_columns, (std::vector<std::string>{"c7", "c3"}));
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, UnknownFieldIsNamed) {
  EXPECT_EQ(field_of(R"({"dataset": {"path": "x", "paht": 1}})"), "dataset.paht");
  EXPECT_EQ(field_of(R"({"trian": {}})"), "trian");
  EXPECT_EQ(field_of(R"({"train": {"policy": {"dim": 4}}})"), "train.policy.dim");
}

TEST(Config, WrongTypesAndValuesAreNamed) {
  EXPECT_EQ(field_of(R"({"k_fewshot": "three"})"), "k_fewshot");
  EXPECT_EQ(field_of(R"({"train": {"gamma": 1.5}})"), "train.gamma");
  EXPECT_EQ(field_of(R"({"task": {"kind": "XX"}})"), "task.kind");
  EXPECT_EQ(field_of(R"({"conditions": ["Baseline", "Oracle"]})"), "conditions[1]");
  EXPECT_EQ(field_of("{not json"), "<root>");
}

TEST(Config, AllErrorsReportedTogether) {
  try {
    config_from_json(R"({"k_fewshot": -1, "bogus": 1, "train": {"epsilon": 2}})");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("k_fewshot"), std::string::npos) << what;
    EXPECT_NE(what.find("bogus"), std::string::npos) << what;
    EXPECT_NE(what.find("train.epsilon"), std::string::npos) << what;
  }
}

TEST(Config, EnvironmentOverridesEndpoints) {
  RunConfig c = config_from_json(kMinimal);
  ::setenv("TABPROMPT_TASKLM_ENDPOINT", "http://127.0.0.1:9/x", 1);
  ::setenv("TABPROMPT_TASKLM_BACKEND", "remote", 1);
  apply_env_overrides(c);
  ::unsetenv("TABPROMPT_TASKLM_ENDPOINT");
  ::unsetenv("TABPROMPT_TASKLM_BACKEND");
  EXPECT_EQ(c.tasklm.remote.endpoint, "http://127.0.0.1:9/x");
  EXPECT_EQ(c.tasklm.backend, TaskLMBackend::Remote);
  EXPECT_TRUE(c.embedder.remote.endpoint.empty());
}

TEST(Config, FingerprintIgnoresSeedAndOutputDir) {
  RunConfig a = config_from_json(kMinimal);
  RunConfig b = a;
  b.seed = 99;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  EXPECT_EQ(config_fingerprint(a).size(), 16u);
  b.train.gamma = 0.5;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  const auto dir = scratch_dir("config_paths");
  write_file(dir / "data.csv", "Brand,Price\nDell,1\n");
  write_file(dir / "run.json", kMinimal);
  const RunConfig c = load_config(dir / "run.json");
  EXPECT_EQ(c.resolve(c.dataset.path), dir / "data.csv");
  EXPECT_NO_THROW(validate_config(c));
  EXPECT_EQ(c.resolve("/abs/x"), std::filesystem::path("/abs/x"));
}

TEST(Config, ValidateChecksSemantics) {
  const auto dir = scratch_dir("config_validate");
  write_file(dir / "data.csv", "Brand,Price\nDell,1\n");
  RunConfig c = config_from_json(kMinimal);
  c.base_dir = dir;

  auto field = [](const RunConfig& cfg) {
    try {
      validate_config(cfg);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<ok>");
  };
  EXPECT_EQ(field(c), "<ok>");

  RunConfig missing = c;
  missing.dataset.path = "nope.csv";
  EXPECT_EQ(field(missing), "dataset.path");

  RunConfig rates = c;
  rates.corruption.semantic_rate = 0.7;
  rates.corruption.syntactic_rate = 0.7;
  EXPECT_EQ(field(rates), "corruption");

  RunConfig remote = c;
  remote.tasklm.backend = TaskLMBackend::Remote;
  EXPECT_EQ(field(remote), "tasklm.endpoint");

  RunConfig em = c;
  em.task.kind = TaskKind::EntityMatching;
  EXPECT_EQ(field(em), "task.label_column");

  EXPECT_THROW(load_config(dir / "absent.json"), ConfigError);
}
