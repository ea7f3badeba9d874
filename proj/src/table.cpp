#include "tabprompt/table.hpp"

#include <algorithm>
#include <cmath>

#include "tabprompt/errors.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

Schema::Schema(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].empty()) {
      throw DataError("column " + std::to_string(i + 1) + " has an empty name");
    }
    if (!index_.emplace(columns_[i], i).second) {
      throw DataError("duplicate column name '" + columns_[i] + "'");
    }
  }
}

bool Schema::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::size_t Schema::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw DataError("unknown column '" + std::string(name) + "'");
  return it->second;
}

Row::Row(std::shared_ptr<const Schema> schema, std::vector<std::string> cells)
    : schema_(std::move(schema)), cells_(std::move(cells)) {
  if (cells_.size() != schema_->size()) {
    throw DataError("row has " + std::to_string(cells_.size()) + " cells, schema has " +
                    std::to_string(schema_->size()));
  }
}

const std::string& Row::at(std::string_view column) const {
  return cells_[schema_->index_of(column)];
}

Row Row::with_cell(std::string_view column, std::string value) const {
  Row copy = *this;
  copy.cells_[schema_->index_of(column)] = std::move(value);
  return copy;
}

Table make_table(std::string name, std::string description, std::vector<std::string> columns,
                 std::vector<std::vector<std::string>> cells) {
  Table table;
  table.name = std::move(name);
  table.description = std::move(description);
  table.schema = std::make_shared<const Schema>(std::move(columns));
  table.rows.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].size() != table.schema->size()) {
      throw DataError("ragged row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(table.schema->size()) + " fields, got " +
                      std::to_string(cells[r].size()));
    }
    table.rows.emplace_back(table.schema, std::move(cells[r]));
  }
  return table;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::DataImputation: return "DI";
    case TaskKind::ErrorDetection: return "ED";
    case TaskKind::EntityMatching: return "EM";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "DI") return TaskKind::DataImputation;
  if (text == "ED") return TaskKind::ErrorDetection;
  if (text == "EM") return TaskKind::EntityMatching;
  throw ConfigError("task.kind", "expected DI, ED or EM, got '" + std::string(text) + "'");
}

const std::string& TaskSpec::target() const {
  if (target_columns.empty()) throw DataError("task has no target column");
  return target_columns.front();
}

std::vector<std::string> TaskSpec::candidate_columns(const Schema& schema) const {
  std::vector<std::string> out;
  for (const auto& c : schema.columns()) {
    if (kind == TaskKind::EntityMatching) {
      if (c == label_column) continue;
    } else if (std::find(target_columns.begin(), target_columns.end(), c) != target_columns.end()) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

TaskSpec make_imputation_task(const Table& table, const std::string& target) {
  TaskSpec task;
  task.kind = TaskKind::DataImputation;
  task.target_columns = {target};
  const std::size_t col = table.schema->index_of(target);
  task.gold.reserve(table.num_rows());
  for (const auto& row : table.rows) task.gold.push_back(row.at(col));
  return task;
}

TaskSpec make_matching_task(const Table& table, const std::string& label_column) {
  TaskSpec task;
  task.kind = TaskKind::EntityMatching;
  task.label_column = label_column;
  const std::size_t col = table.schema->index_of(label_column);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    std::string v = table.rows[r].at(col);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes") {
      task.gold.emplace_back("yes");
    } else if (v == "0" || v == "false" || v == "no") {
      task.gold.emplace_back("no");
    } else {
      throw DataError("row " + std::to_string(r + 1) + ": match label '" + table.rows[r].at(col) +
                      "' is not a boolean");
    }
  }
  validate_task(task, table);
  return task;
}

TaskSpec make_detection_task(const Table& table, const std::string& target,
                             const std::vector<bool>& error_flags) {
  if (error_flags.size() != table.num_rows()) {
    throw DataError("error flags cover " + std::to_string(error_flags.size()) + " rows, table has " +
                    std::to_string(table.num_rows()));
  }
  TaskSpec task;
  task.kind = TaskKind::ErrorDetection;
  task.target_columns = {target};
  table.schema->index_of(target);
  for (bool flag : error_flags) task.gold.emplace_back(flag ? "yes" : "no");
  return task;
}

void validate_task(const TaskSpec& task, const Table& table) {
  if (task.gold.size() != table.num_rows()) {
    throw DataError("gold answers cover " + std::to_string(task.gold.size()) + " rows, table has " +
                    std::to_string(table.num_rows()));
  }
  if (task.kind == TaskKind::EntityMatching) {
    table.schema->index_of(task.label_column);
    bool left = false, right = false;
    for (const auto& c : table.columns()) {
      left |= c.rfind("l_", 0) == 0;
      right |= c.rfind("r_", 0) == 0;
    }
    if (!left || !right) throw DataError("entity matching needs l_ and r_ prefixed columns");
    return;
  }
  if (task.target_columns.size() != 1) {
    throw DataError("DI and ED runs take exactly one target column");
  }
  table.schema->index_of(task.target_columns.front());
}

DatasetSplits make_splits(const Table& table, SplitRatios ratios, std::uint64_t seed) {
  const std::size_t n = table.num_rows();
  if (n < 3) throw DataError("need at least 3 rows to split, have " + std::to_string(n));
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)) {
    throw ConfigError("splits.ratios", "ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("splits.ratios", "ratios must sum to 1");
  }
  // The epsilon absorbs representation error such as (1/3) * 3.
  auto floor_size = [n](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_val = floor_size(ratios.validation);
  const std::size_t n_test = floor_size(ratios.test);

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  DatasetSplits splits;
  splits.test.assign(order.begin(), order.begin() + n_test);
  splits.validation.assign(order.begin() + n_test, order.begin() + n_test + n_val);
  splits.train.assign(order.begin() + n_test + n_val, order.end());
  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.validation.begin(), splits.validation.end());
  std::sort(splits.test.begin(), splits.test.end());
  return splits;
}

}  // namespace tabprompt
