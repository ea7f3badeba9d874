#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabprompt/table.hpp"

namespace tabprompt {

/// Fixed wording shared by every experimental condition.
struct PromptTemplate {
  static constexpr std::string_view kPairSeparator = "; ";
  static constexpr std::string_view kExampleHeader = "Example ";  // followed by "<n>: "
  static constexpr std::string_view kTestHeader = "Test Example: ";
  static constexpr std::string_view kAnswerName = "Answer";

  static std::string_view preamble(TaskKind kind);
  static std::string question(const TaskSpec& task, const Row& test_row);
};

/// "name: value" pairs joined by "; " in the given order. Empty cells render
/// as "name: ". Throws DataError for unknown columns.
std::string serialize_row(const Row& row, std::span<const std::string> columns);

struct FewshotExample {
  std::size_t pool_index = 0;
  const Row* row = nullptr;
  std::string gold;
};

struct RenderedPrompt {
  std::string text;
  std::vector<std::string> column_order;
  std::vector<std::size_t> fewshot_ids;
  std::string expected;
  /// Index of the test row in the source table; the synthetic oracle uses it
  /// to look up ground truth.
  std::size_t row_id = 0;

  std::string hash() const;
};

/// Renders preamble, numbered few-shot examples with inline answers, the test
/// example and the task question, one per line. Throws DataError for an
/// empty column sequence or, for DI, a sequence containing the target.
RenderedPrompt build_prompt(const TaskSpec& task, const Row& test_row, std::size_t row_id,
                            std::span<const std::string> columns,
                            std::span<const FewshotExample> fewshots);

/// Column names serialized on the "Test Example:" line, in order.
std::vector<std::string> parse_test_columns(std::string_view prompt_text);

}  // namespace tabprompt
