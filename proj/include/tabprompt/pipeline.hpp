#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tabprompt/embedding.hpp"
#include "tabprompt/fewshot.hpp"
#include "tabprompt/prompt.hpp"
#include "tabprompt/table.hpp"

namespace tabprompt {

struct FewshotSettings {
  std::size_t k = 3;
  FewshotMethod method = FewshotMethod::CL;
};

/// Retrieves few-shot examples from a fixed pool and renders the prompt for
/// one test row. Shared by the reward loop and the evaluation harness.
class PromptAssembler {
 public:
  PromptAssembler(const Table& table, const TaskSpec& task, std::span<const std::size_t> pool_rows,
                  Embedder& embedder);

  /// `seed` only matters for the random method. k is capped at the pool size.
  RenderedPrompt render(std::size_t row, std::span<const std::string> columns,
                        const FewshotSettings& fewshot, std::uint64_t seed) const;

  const Table& table() const noexcept { return table_; }
  const TaskSpec& task() const noexcept { return task_; }

 private:
  const Table& table_;
  const TaskSpec& task_;
  std::vector<PoolRow> pool_;
  Embedder& embedder_;
};

}  // namespace tabprompt
