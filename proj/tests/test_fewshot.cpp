#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tabprompt/errors.hpp"
#include "tabprompt/fewshot.hpp"
#include "tabprompt/random.hpp"

using namespace tabprompt;

namespace {

using oracle::pool_of;

std::vector<std::size_t> indices(const std::vector<PoolRow>& rows) {
  std::vector<std::size_t> out;
  for (const auto& r : rows) out.push_back(r.index);
  return out;
}

}  // namespace

TEST(SimCl, IdenticalRowsScoreOne) {
  DeterministicEmbedder e(64, 0);
  const Table t = tabprompt::testing::laptops();
  const std::vector<std::string> cols{"Brand", "Price"};
  EXPECT_NEAR(sim_cl(t.rows[0], t.rows[0], cols, e), 1.0, 1e-12);
  EXPECT_NEAR(sim_nl(t.rows[0], t.rows[0], cols, e), 1.0, 1e-12);
}

TEST(SimCl, MeanOfCellCosines) {
  // One shared cell (cosine 1) and one cell pair with exactly orthogonal
  // vectors: a two-dimensional embedder that maps "p" and "q" to e1 and e2.
  struct Basis final : Embedder {
    EmbeddingVector embed(std::string_view t) override {
      if (t.empty()) return {{0, 0}, true};
      return normalize(t == "q" ? std::vector<double>{0, 1} : std::vector<double>{1, 0});
    }
    std::size_t dimension() const override { return 2; }
  } basis;
  const Table t = make_table("t", "", {"a", "b"}, {{"p", "p"}, {"p", "q"}});
  const std::vector<std::string> cols{"a", "b"};
  EXPECT_DOUBLE_EQ(sim_cl(t.rows[0], t.rows[1], cols, basis), 0.5);
}

TEST(SimCl, EmptyCellsSkipped) {
  DeterministicEmbedder e(64, 0);
  const Table t = make_table("t", "", {"a", "b"}, {{"x", "y"}, {"", ""}, {"x", ""}});
  const std::vector<std::string> cols{"a", "b"};
  EXPECT_EQ(sim_cl(t.rows[0], t.rows[1], cols, e), 0.0);
  // Only column a is comparable, and it matches.
  EXPECT_NEAR(sim_cl(t.rows[0], t.rows[2], cols, e), 1.0, 1e-12);
}

TEST(SimCl, IndependentRecomputation) {
  DeterministicEmbedder e(128, 4);
  const Table t = tabprompt::testing::laptops();
  const std::vector<std::string> cols{"Brand", "Price", "Screen"};
  for (std::size_t i = 0; i < t.num_rows(); ++i) {
    double expect = 0;
    for (const auto& c : cols) {
      const auto a = e.embed(t.cell(0, c)).values;
      const auto b = e.embed(t.cell(i, c)).values;
      expect += std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    }
    expect /= 3.0;
    EXPECT_NEAR(sim_cl(t.rows[0], t.rows[i], cols, e), expect, 1e-12);
  }
}

TEST(SimClProperty, ColumnOrderInvariant) {
  DeterministicEmbedder e(64, 1);
  const Table t = tabprompt::testing::laptops();
  std::vector<std::string> cols{"Brand", "Price", "Category", "Screen"};
  const double base = sim_cl(t.rows[1], t.rows[4], cols, e);
  std::sort(cols.begin(), cols.end());
  do {
    EXPECT_NEAR(sim_cl(t.rows[1], t.rows[4], cols, e), base, 1e-15);
  } while (std::next_permutation(cols.begin(), cols.end()));
}

TEST(SimClProperty, CopyingATestCellNeverDecreases) {
  DeterministicEmbedder e(64, 2);
  Rng rng(17);
  const std::vector<std::string> cols{"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> cells(2, std::vector<std::string>(3));
    for (auto& row : cells) {
      for (auto& cell : row) cell = rng.below(5) == 0 ? "" : "v" + std::to_string(rng.below(6));
    }
    const Table t = make_table("t", "", cols, cells);
    const double before = sim_cl(t.rows[0], t.rows[1], cols, e);
    const std::string& col = cols[rng.below(3)];
    const Row copied = t.rows[1].with_cell(col, t.cell(0, col));
    EXPECT_GE(sim_cl(t.rows[0], copied, cols, e), before - 1e-12);
  }
}

TEST(SelectFewshot, ZeroAndTooMany) {
  DeterministicEmbedder e(32, 0);
  const Table t = tabprompt::testing::laptops();
  FewshotQuery q{&t.rows[0], pool_of(t, 0), {"Brand"}, 0, FewshotMethod::CL, 0, {}};
  EXPECT_TRUE(select_fewshot(q, e).empty());
  q.k = 6;
  EXPECT_THROW(select_fewshot(q, e), DataError);
}

TEST(SelectFewshot, ExactCopyRankedFirst) {
  DeterministicEmbedder e(64, 0);
  Table t = tabprompt::testing::laptops();
  auto cells = std::vector<std::vector<std::string>>{};
  for (const auto& r : t.rows) cells.emplace_back(r.cells().begin(), r.cells().end());
  cells.push_back(cells[2]);
  t = make_table("t", "", t.columns(), cells);
  for (auto method : {FewshotMethod::NL, FewshotMethod::CL}) {
    FewshotQuery q{&t.rows[2], pool_of(t, 2), {"Brand", "Price", "Screen"}, 2, method, 0, {}};
    EXPECT_EQ(select_fewshot(q, e).front().index, 6u);
  }
}

TEST(SelectFewshot, TiesBreakToLowerIndex) {
  DeterministicEmbedder e(32, 0);
  const Table t = make_table("t", "", {"a"}, {{"x"}, {"y"}, {"y"}, {"y"}, {"z"}});
  FewshotQuery q{&t.rows[0], pool_of(t, 0), {"a"}, 3, FewshotMethod::CL, 0, {}};
  auto picked = indices(select_fewshot(q, e));
  // Rows 1-3 score identically; row 4 has its own value.
  std::vector<std::size_t> expect = oracle::brute_force_fewshot(q, e);
  EXPECT_EQ(picked, expect);
  q.pool = {{3, &t.rows[3]}, {1, &t.rows[1]}, {2, &t.rows[2]}};
  q.k = 2;
  EXPECT_EQ(indices(select_fewshot(q, e)), (std::vector<std::size_t>{1, 2}));
}

TEST(SelectFewshot, ExcludedColumnsIgnored) {
  DeterministicEmbedder e(64, 0);
  const Table t = make_table("t", "", {"key", "target"}, {{"k1", "gold"}, {"k2", "gold"}, {"k1", "other"}});
  FewshotQuery q{&t.rows[0], pool_of(t, 0), {"key", "target"}, 1, FewshotMethod::CL, 0, {"target"}};
  EXPECT_EQ(select_fewshot(q, e).front().index, 2u);
}

TEST(SelectFewshot, RandomIsSeededSampleWithoutReplacement) {
  DeterministicEmbedder e(32, 0);
  const Table t = tabprompt::testing::laptops();
  FewshotQuery q{&t.rows[0], pool_of(t, 0), {"Brand"}, 3, FewshotMethod::Random, 5, {}};
  const auto a = indices(select_fewshot(q, e));
  EXPECT_EQ(a, indices(select_fewshot(q, e)));
  std::set<std::size_t> uniq(a.begin(), a.end());
  EXPECT_EQ(uniq.size(), 3u);
  EXPECT_FALSE(uniq.count(0));
}

TEST(SelectFewshot, ExactDuplicatesRankFirstUnderBothMethods) {
  // Identical cells embed identically, so duplicates of the test value score
  // a cosine of 1 whichever serialization is used.
  DeterministicEmbedder e(64, 3);
  Rng rng(3);
  std::vector<std::vector<std::string>> cells;
  for (int i = 0; i < 30; ++i) cells.push_back({"v" + std::to_string(rng.below(8))});
  const Table t = make_table("t", "", {"a"}, cells);
  std::vector<std::size_t> duplicates;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i] == cells[0]) duplicates.push_back(i);
  }
  ASSERT_GE(duplicates.size(), 1u);
  const std::size_t k = std::min<std::size_t>(4, duplicates.size());
  duplicates.resize(k);
  for (auto method : {FewshotMethod::NL, FewshotMethod::CL}) {
    FewshotQuery q{&t.rows[0], pool_of(t, 0), {"a"}, k, method, 0, {}};
    EXPECT_EQ(indices(select_fewshot(q, e)), duplicates) << to_string(method);
  }
}

TEST(SelectFewshot, MatchesBruteForceOnRandomPools) {
  DeterministicEmbedder e(64, 9);
  Rng rng(99);
  const std::vector<std::string> cols{"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        row.push_back(rng.below(6) == 0 ? "" : "x" + std::to_string(rng.below(4)));
      }
      cells.push_back(row);
    }
    const Table t = make_table("t", "", cols, cells);
    FewshotQuery q{&t.rows[0], pool_of(t, 0), {"c", "a", "d"}, rng.below(std::min<std::size_t>(6, n)),
                   trial % 2 ? FewshotMethod::NL : FewshotMethod::CL, 0, {}};
    EXPECT_EQ(indices(select_fewshot(q, e)), oracle::brute_force_fewshot(q, e)) << "trial " << trial;
  }
}
