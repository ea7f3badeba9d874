#include "tabprompt/prompt.hpp"

#include <algorithm>

#include "tabprompt/errors.hpp"
#include "tabprompt/hash.hpp"

namespace tabprompt {

std::string_view PromptTemplate::preamble(TaskKind kind) {
  switch (kind) {
    case TaskKind::DataImputation:
      return "Each example is a table row written as \"column: value\" pairs. "
             "Fill in the missing value of the requested column.";
    case TaskKind::ErrorDetection:
      return "Each example is a table row written as \"column: value\" pairs. "
             "Decide whether the requested cell contains an error.";
    case TaskKind::EntityMatching:
      return "Each example is a table row written as \"column: value\" pairs describing two "
             "records, l_ and r_. Decide whether they refer to the same entity.";
  }
  return {};
}

std::string PromptTemplate::question(const TaskSpec& task, const Row& test_row) {
  switch (task.kind) {
    case TaskKind::DataImputation:
      return "What is the value of " + task.target() + "?";
    case TaskKind::ErrorDetection:
      return "Is there an error in \"" + task.target() + ": " + test_row.at(task.target()) +
             "\"? Answer yes or no.";
    case TaskKind::EntityMatching:
      return "Do the l_ and r_ records refer to the same entity? Answer yes or no.";
  }
  return {};
}

std::string serialize_row(const Row& row, std::span<const std::string> columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += PromptTemplate::kPairSeparator;
    const std::string& value = row.at(columns[i]);
    out += columns[i];
    out += ": ";
    out += value;
  }
  return out;
}

std::string RenderedPrompt::hash() const { return hash_hex(text); }

namespace {

std::string render_answer(const TaskSpec& task, const Row& row, const std::string& gold) {
  std::string out(PromptTemplate::kPairSeparator);
  switch (task.kind) {
    case TaskKind::DataImputation:
      return out + task.target() + ": " + gold;
    case TaskKind::ErrorDetection:
      out += task.target() + ": " + row.at(task.target());
      out += PromptTemplate::kPairSeparator;
      break;
    case TaskKind::EntityMatching:
      break;
  }
  out += PromptTemplate::kAnswerName;
  return out + ": " + gold;
}

}  // namespace

RenderedPrompt build_prompt(const TaskSpec& task, const Row& test_row, std::size_t row_id,
                            std::span<const std::string> columns,
                            std::span<const FewshotExample> fewshots) {
  if (columns.empty()) throw DataError("cannot build a prompt from an empty column sequence");
  if (task.kind == TaskKind::DataImputation &&
      std::find(columns.begin(), columns.end(), task.target()) != columns.end()) {
    throw DataError("imputation target '" + task.target() + "' must not be a prompt column");
  }

  RenderedPrompt prompt;
  prompt.column_order.assign(columns.begin(), columns.end());
  prompt.row_id = row_id;
  prompt.expected = task.expected(row_id);

  std::string& text = prompt.text;
  text += PromptTemplate::preamble(task.kind);
  text += '\n';
  for (std::size_t n = 0; n < fewshots.size(); ++n) {
    const auto& shot = fewshots[n];
    text += PromptTemplate::kExampleHeader;
    text += std::to_string(n + 1) + ": ";
    text += serialize_row(*shot.row, columns);
    text += render_answer(task, *shot.row, shot.gold);
    text += '\n';
    prompt.fewshot_ids.push_back(shot.pool_index);
  }
  text += PromptTemplate::kTestHeader;
  text += serialize_row(test_row, columns);
  text += '\n';
  text += PromptTemplate::question(task, test_row);
  return prompt;
}

std::vector<std::string> parse_test_columns(std::string_view prompt_text) {
  const auto header = PromptTemplate::kTestHeader;
  std::size_t start = std::string_view::npos;
  for (std::size_t pos = 0; pos < prompt_text.size();) {
    if (prompt_text.substr(pos, header.size()) == header) {
      start = pos + header.size();
    }
    const auto nl = prompt_text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (start == std::string_view::npos) throw DataError("prompt has no test example line");
  auto end = prompt_text.find('\n', start);
  std::string_view line = prompt_text.substr(start, end == std::string_view::npos ? end : end - start);

  std::vector<std::string> names;
  const auto sep = PromptTemplate::kPairSeparator;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto next = line.find(sep, pos);
    std::string_view pair = line.substr(pos, next == std::string_view::npos ? next : next - pos);
    auto colon = pair.find(": ");
    if (colon != std::string_view::npos) names.emplace_back(pair.substr(0, colon));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return names;
}

}  // namespace tabprompt
