#include "tabprompt/pipeline.hpp"

#include <algorithm>

#include "tabprompt/errors.hpp"

namespace tabprompt {

PromptAssembler::PromptAssembler(const Table& table, const TaskSpec& task,
                                 std::span<const std::size_t> pool_rows, Embedder& embedder)
    : table_(table), task_(task), embedder_(embedder) {
  for (std::size_t r : pool_rows) {
    if (r >= table.num_rows()) throw DataError("pool row " + std::to_string(r) + " out of range");
    pool_.push_back({r, &table.rows[r]});
  }
}

RenderedPrompt PromptAssembler::render(std::size_t row, std::span<const std::string> columns,
                                       const FewshotSettings& fewshot, std::uint64_t seed) const {
  FewshotQuery query;
  query.test_row = &table_.rows.at(row);
  query.pool = pool_;
  // The test row never serves as its own example.
  std::erase_if(query.pool, [row](const PoolRow& p) { return p.index == row; });
  query.columns.assign(columns.begin(), columns.end());
  query.k = std::min(fewshot.k, query.pool.size());
  query.method = fewshot.method;
  query.seed = seed;
  if (task_.kind == TaskKind::DataImputation) query.excluded = {task_.target()};

  std::vector<FewshotExample> shots;
  for (const auto& p : select_fewshot(query, embedder_)) {
    shots.push_back({p.index, p.row, task_.expected(p.index)});
  }
  return build_prompt(task_, *query.test_row, row, columns, shots);
}

}  // namespace tabprompt
