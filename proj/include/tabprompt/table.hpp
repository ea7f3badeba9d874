#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tabprompt {

/// Ordered, duplicate-free column names. Immutable once built.
class Schema {
 public:
  explicit Schema(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  bool contains(std::string_view name) const;
  /// Throws DataError for unknown names.
  std::size_t index_of(std::string_view name) const;

 private:
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One record. Always holds exactly one cell per schema column; missing
/// values are empty strings.
class Row {
 public:
  Row(std::shared_ptr<const Schema> schema, std::vector<std::string> cells);

  const std::string& at(std::string_view column) const;
  const std::string& at(std::size_t index) const { return cells_.at(index); }
  std::span<const std::string> cells() const noexcept { return cells_; }
  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }

  Row with_cell(std::string_view column, std::string value) const;

  friend bool operator==(const Row& a, const Row& b) { return a.cells_ == b.cells_; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<std::string> cells_;
};

struct Table {
  std::string name;
  std::string description;
  std::shared_ptr<const Schema> schema;
  std::vector<Row> rows;

  const std::vector<std::string>& columns() const { return schema->columns(); }
  std::size_t num_rows() const noexcept { return rows.size(); }
  const std::string& cell(std::size_t row, std::string_view column) const {
    return rows.at(row).at(column);
  }
};

/// Builds a table from raw cells; validates names and row widths.
Table make_table(std::string name, std::string description, std::vector<std::string> columns,
                 std::vector<std::vector<std::string>> cells);

enum class TaskKind { DataImputation, ErrorDetection, EntityMatching };

std::string_view to_string(TaskKind kind);
/// Accepts "DI", "ED", "EM".
TaskKind parse_task_kind(std::string_view text);

/// A downstream task over one table. Gold answers are stored per row as the
/// text the Task-LM is expected to produce: the true cell for imputation,
/// "yes"/"no" for detection and matching.
struct TaskSpec {
  TaskKind kind = TaskKind::DataImputation;
  /// DI/ED: exactly one target column per run. Empty for EM.
  std::vector<std::string> target_columns;
  /// EM only: the column holding the match flag. Never shown to the model.
  std::string label_column;
  std::vector<std::string> gold;

  const std::string& target() const;
  const std::string& expected(std::size_t row) const { return gold.at(row); }
  bool positive(std::size_t row) const { return gold.at(row) == "yes"; }
  /// Columns the agent and the prompt may use: the schema minus the target
  /// (DI/ED) or label column (EM).
  std::vector<std::string> candidate_columns(const Schema& schema) const;
};

/// DI task: gold = current contents of the target column.
TaskSpec make_imputation_task(const Table& table, const std::string& target);
/// EM task: gold read from `label_column` ("1"/"true"/"yes" mean match).
TaskSpec make_matching_task(const Table& table, const std::string& label_column);
/// ED task: gold = per-row error flags for the target column.
TaskSpec make_detection_task(const Table& table, const std::string& target,
                             const std::vector<bool>& error_flags);

/// Validates a task against a table (targets exist, EM prefixes present, gold sized).
void validate_task(const TaskSpec& task, const Table& table);

struct DatasetSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.15;
  double test = 0.15;
};

/// Seeded shuffle then cut. Validation and test sizes are floor(ratio * n);
/// the remainder goes to train.
DatasetSplits make_splits(const Table& table, SplitRatios ratios, std::uint64_t seed);

}  // namespace tabprompt
