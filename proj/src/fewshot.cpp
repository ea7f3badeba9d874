#include "tabprompt/fewshot.hpp"

#include <algorithm>

#include "tabprompt/errors.hpp"
#include "tabprompt/prompt.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

std::string_view to_string(FewshotMethod method) {
  switch (method) {
    case FewshotMethod::NL: return "NL";
    case FewshotMethod::CL: return "CL";
    case FewshotMethod::Random: return "random";
  }
  return "?";
}

FewshotMethod parse_fewshot_method(std::string_view text) {
  if (text == "NL") return FewshotMethod::NL;
  if (text == "CL") return FewshotMethod::CL;
  if (text == "random") return FewshotMethod::Random;
  throw ConfigError("fewshot.method", "expected NL, CL or random, got '" + std::string(text) + "'");
}

double sim_nl(const Row& test_row, const Row& pool_row, std::span<const std::string> columns,
              Embedder& embedder) {
  return cosine(embedder.embed(serialize_row(test_row, columns)),
                embedder.embed(serialize_row(pool_row, columns)));
}

double sim_cl(const Row& test_row, const Row& pool_row, std::span<const std::string> columns,
              Embedder& embedder) {
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& c : columns) {
    const auto& a = test_row.at(c);
    const auto& b = pool_row.at(c);
    if (a.empty() || b.empty()) continue;
    total += cosine(embedder.embed(a), embedder.embed(b));
    ++used;
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

std::vector<PoolRow> select_fewshot(const FewshotQuery& query, Embedder& embedder) {
  if (query.k > query.pool.size()) {
    throw DataError("asked for " + std::to_string(query.k) + " few-shot examples from a pool of " +
                    std::to_string(query.pool.size()));
  }
  if (query.k == 0) return {};

  if (query.method == FewshotMethod::Random) {
    Rng rng(query.seed);
    std::vector<PoolRow> out;
    for (std::size_t i : rng.sample_without_replacement(query.pool.size(), query.k)) {
      out.push_back(query.pool[i]);
    }
    return out;
  }

  std::vector<std::string> columns;
  for (const auto& c : query.columns) {
    if (std::find(query.excluded.begin(), query.excluded.end(), c) == query.excluded.end()) {
      columns.push_back(c);
    }
  }
  if (columns.empty()) throw DataError("similarity-based few-shot selection needs columns");

  std::vector<std::pair<double, PoolRow>> scored;
  scored.reserve(query.pool.size());
  for (const auto& entry : query.pool) {
    const double s = query.method == FewshotMethod::NL
                         ? sim_nl(*query.test_row, *entry.row, columns, embedder)
                         : sim_cl(*query.test_row, *entry.row, columns, embedder);
    scored.emplace_back(s, entry);
  }
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(query.k),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second.index < b.second.index;
                    });
  std::vector<PoolRow> out;
  for (std::size_t i = 0; i < query.k; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace tabprompt
