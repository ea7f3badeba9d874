#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tabprompt/corruption.hpp"
#include "tabprompt/embedding.hpp"
#include "tabprompt/rl.hpp"
#include "tabprompt/table.hpp"
#include "tabprompt/task_lm.hpp"

namespace tabprompt {

struct DatasetConfig {
  std::string path;
  std::string description;
};

struct TaskConfig {
  TaskKind kind = TaskKind::DataImputation;
  /// DI/ED target column.
  std::string target;
  /// EM match-flag column.
  std::string label_column;
  /// ED only: report written by `corrupt` for an already corrupted dataset.
  /// When empty, errors are injected in memory with the corruption settings.
  std::string error_report;
};

struct SplitConfig {
  SplitRatios ratios;
  std::uint64_t seed = 0;
};

/// Oracle Task-LM knobs; gold answers come from the task.
struct OracleConfig {
  std::vector<std::string> informative_columns;
  bool order_sensitive = true;
  double p_correct_satisfied = 1.0;
  double p_correct_otherwise = 0.0;
  bool fewshot_sensitive = false;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::vector<std::string> columns;
  std::size_t limit = 0;
  bool subset_mode = false;
  FewshotMethod fewshot_method = FewshotMethod::CL;
};

struct RunConfig {
  DatasetConfig dataset;
  TaskConfig task;
  SplitConfig splits;
  CorruptionSettings corruption;
  EmbedderConfig embedder;
  TaskLMConfig tasklm;
  OracleConfig oracle;
  TrainConfig train;
  std::vector<std::string> conditions{"Baseline", "MCS-RFS", "MCS-NFS", "MCS-CLFS", "RLCS-CLFS"};
  std::vector<std::string> manual_columns;
  std::size_t k_fewshot = 3;
  SweepConfig sweep;
  std::string output_dir = "runs";
  std::uint64_t seed = 0;

  /// Directory relative paths are resolved against (the config file's).
  /// Not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
};

/// Parses and validates. Unknown keys and invalid values are collected and
/// reported together; the thrown ConfigError names the first bad field.
RunConfig config_from_json(const std::string& text);
/// Canonical form: every field present, keys sorted.
std::string config_to_json(const RunConfig& config);

/// Reads the file, applies environment overrides, sets base_dir.
RunConfig load_config(const std::filesystem::path& path);

/// TABPROMPT_EMBED_ENDPOINT, TABPROMPT_TASKLM_ENDPOINT,
/// TABPROMPT_EMBED_BACKEND, TABPROMPT_TASKLM_BACKEND.
void apply_env_overrides(RunConfig& config);

/// Semantic checks beyond parsing: files exist, conditions known, rates legal.
void validate_config(const RunConfig& config);

/// Stable 16-hex-digit hash of the canonical config, excluding the seed and
/// output directory so every seed of one experiment shares it.
std::string config_fingerprint(const RunConfig& config);

}  // namespace tabprompt
