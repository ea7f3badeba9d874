#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabprompt/embedding.hpp"
#include "tabprompt/pipeline.hpp"
#include "tabprompt/rl.hpp"
#include "tabprompt/table.hpp"
#include "tabprompt/task_lm.hpp"

namespace tabprompt {

enum class ConditionKind { Baseline, McsRfs, McsNfs, McsClfs, RlcsClfs };

std::string_view to_string(ConditionKind kind);
/// "Baseline", "MCS-RFS", "MCS-NFS", "MCS-CLFS", "RLCS-CLFS".
ConditionKind parse_condition(std::string_view name);

struct Condition {
  ConditionKind kind = ConditionKind::Baseline;
  /// Manual selection for the MCS-* conditions; the extracted policy for RLCS-CLFS.
  ColumnSequence columns;
};

struct EvalRecord {
  std::size_t row = 0;
  std::string prompt_hash;
  std::string output;
  std::string expected;
  bool matched = false;
  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EvalRecord> records;
  double metric = 0.0;
  friend bool operator==(const SeedRun&, const SeedRun&) = default;
};

struct EvalReport {
  std::string dataset;
  TaskKind task = TaskKind::DataImputation;
  std::string condition;
  ColumnSequence columns;
  std::string fewshot_method;
  std::string metric_name;
  std::vector<SeedRun> runs;
  /// Mean over runs and population standard deviation.
  double value = 0.0;
  double stddev = 0.0;
  std::string fingerprint;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Matched / total. Throws on empty input.
double accuracy(std::span<const EvalRecord> records);

/// Unweighted mean of per-class F1 over the classes present in `golds`.
double f1_macro(const std::vector<bool>& predictions, const std::vector<bool>& golds);

/// Accuracy for DI; F1-macro over yes/no answers for ED and EM.
std::string_view metric_name(TaskKind kind);
double compute_metric(TaskKind kind, std::span<const EvalRecord> records);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

struct EvalContext {
  const Table& table;
  const TaskSpec& task;
  const DatasetSplits& splits;
  Embedder& embedder;
  TaskLM& tasklm;
};

/// Number of seeds used by the random-few-shot conditions.
inline constexpr std::size_t kRandomConditionSeeds = 3;

/// Evaluates one condition on the test split with few-shots drawn from the
/// validation split. Baseline and MCS-RFS run kRandomConditionSeeds seeds
/// (seed, seed+1, ...).
EvalReport run_condition(const EvalContext& ctx, const Condition& condition, std::size_t k_fewshot,
                         std::uint64_t seed);

/// Metric over the test split for a fixed column sequence and few-shot method.
SeedRun evaluate_columns(const EvalContext& ctx, std::span<const std::string> columns,
                         const FewshotSettings& fewshot, std::uint64_t seed);

struct SweepOptions {
  /// 0 means exhaustive (allowed up to 8 columns).
  std::size_t limit = 0;
  /// Also evaluate every non-empty proper subset, in all orders.
  bool subset_mode = false;
  FewshotSettings fewshot;
  std::uint64_t seed = 0;
};

struct SweepEntry {
  ColumnSequence columns;
  double metric = 0.0;
};

struct SweepSummary {
  std::vector<SweepEntry> entries;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantile of `sorted` at q in [0, 1].
double quantile(std::span<const double> sorted, double q);

/// Evaluates every ordering (and optionally every subset) of `columns`.
SweepSummary permutation_sweep(const EvalContext& ctx, const ColumnSequence& columns,
                               const SweepOptions& options);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
/// One CSV line per report: dataset, task, condition, metric, value, std.
std::string summary_csv(std::span<const EvalReport> reports);
std::string sweep_to_csv(const SweepSummary& summary);

}  // namespace tabprompt
