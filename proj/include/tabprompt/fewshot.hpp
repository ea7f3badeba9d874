#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabprompt/embedding.hpp"
#include "tabprompt/table.hpp"

namespace tabprompt {

enum class FewshotMethod { NL, CL, Random };

std::string_view to_string(FewshotMethod method);
FewshotMethod parse_fewshot_method(std::string_view text);

struct PoolRow {
  std::size_t index = 0;
  const Row* row = nullptr;
};

struct FewshotQuery {
  const Row* test_row = nullptr;
  std::vector<PoolRow> pool;
  std::vector<std::string> columns;
  std::size_t k = 3;
  FewshotMethod method = FewshotMethod::CL;
  std::uint64_t seed = 0;
  /// Dropped from `columns` before scoring (the DI target, to avoid leaking gold).
  std::vector<std::string> excluded;
};

/// Cosine between embeddings of the two rows serialized over `columns`.
double sim_nl(const Row& test_row, const Row& pool_row, std::span<const std::string> columns,
              Embedder& embedder);

/// Mean over columns of the cosine between per-cell embeddings. Columns where
/// either cell is empty are skipped; 0 when every column is skipped.
double sim_cl(const Row& test_row, const Row& pool_row, std::span<const std::string> columns,
              Embedder& embedder);

/// The k most similar pool rows, most similar first, ties to the lower pool
/// index. The random method draws a seeded sample without replacement.
std::vector<PoolRow> select_fewshot(const FewshotQuery& query, Embedder& embedder);

}  // namespace tabprompt
