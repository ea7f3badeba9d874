#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabprompt/config.hpp"
#include "tabprompt/evaluation.hpp"
#include "tabprompt/rl.hpp"

namespace tabprompt {

/// Everything a subcommand needs, materialized from a RunConfig.
struct Workspace {
  RunConfig config;
  std::string fingerprint;
  Table table;
  TaskSpec task;
  DatasetSplits splits;
  std::shared_ptr<Embedder> embedder;
  std::unique_ptr<TaskLM> tasklm;

  EvalContext context() { return EvalContext{table, task, splits, *embedder, *tasklm}; }
};

/// Loads the dataset (injecting errors in memory for ED without a report),
/// builds the task, splits and backends.
Workspace open_workspace(const RunConfig& config);

/// <output_dir>/<fingerprint>/seed-<seed>
std::filesystem::path run_directory(const RunConfig& config);

/// Appends JSON lines to <run dir>/run.log.
class RunLog {
 public:
  explicit RunLog(const std::filesystem::path& dir);
  void event(const std::string& name, const std::string& json_fields = "{}");

 private:
  std::filesystem::path path_;
};

struct IngestSummary {
  std::size_t rows = 0;
  std::vector<std::string> columns;
  DatasetSplits splits;
};

/// Writes ingest.json (schema, row count, split membership).
IngestSummary run_ingest(const RunConfig& config);

/// Writes corrupted.csv and corruption_report.jsonl; the input file is untouched.
CorruptionReport run_corrupt(const RunConfig& config);

struct TrainArtifacts {
  TrainResult result;
  ColumnSequence policy;
};

/// Trains and writes checkpoint.json, episodes.jsonl and policy.json. With
/// `resume`, continues from the run directory's checkpoint if present.
TrainArtifacts run_train(const RunConfig& config, bool resume);

/// Reads policy.json from the run directory; throws DataError when absent.
ColumnSequence load_trained_policy(const RunConfig& config);

/// Evaluates the named conditions (all configured ones when empty), writes
/// one report per condition plus summary.csv.
std::vector<EvalReport> run_evaluate(const RunConfig& config, const std::vector<std::string>& conditions);

/// Writes sweep.csv and sweep_summary.json.
SweepSummary run_sweep(const RunConfig& config);

/// The prompt for one row. `columns` defaults to the manual columns, then to
/// all candidate columns; `row` defaults to the first test row.
std::string run_build_prompt(const RunConfig& config, std::optional<std::size_t> row,
                             const std::vector<std::string>& columns);

}  // namespace tabprompt
