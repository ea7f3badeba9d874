#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"
#include "tabprompt/corruption.hpp"
#include "tabprompt/errors.hpp"

using namespace tabprompt;

namespace {

Table numbered(std::size_t n) {
  std::vector<std::vector<std::string>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    cells.push_back({"city" + std::to_string(i % 37), "ZIP" + std::to_string(10000 + i % 53)});
  }
  return make_table("addr", "", {"city", "zip"}, cells);
}

// True when `longer` is `shorter` with `extra` lowercase letters inserted.
bool is_insertion(const std::string& shorter, const std::string& longer, std::size_t& extra) {
  if (longer.size() <= shorter.size()) return false;
  extra = longer.size() - shorter.size();
  std::size_t i = 0;
  for (char c : longer) {
    if (i < shorter.size() && c == shorter[i]) {
      ++i;
    } else if (c < 'a' || c > 'z') {
      return false;
    }
  }
  return i == shorter.size();
}

}  // namespace

TEST(Corruption, CountsRoundHalfUp) {
  const Table t = numbered(10);
  const auto [bad, report] = inject_errors(t, {"city", 0.25, 0.25, 1});
  std::size_t sem = 0, syn = 0;
  for (const auto& e : report.entries) (e.kind == CorruptionKind::Semantic ? sem : syn)++;
  EXPECT_EQ(sem, 3u);  // 2.5 rounds up
  EXPECT_EQ(syn, 3u);
}

TEST(Corruption, ZeroRatesChangeNothing) {
  const Table t = numbered(20);
  const auto [bad, report] = inject_errors(t, {"city", 0.0, 0.0, 1});
  EXPECT_TRUE(report.entries.empty());
  EXPECT_EQ(to_string(CorruptionKind::Semantic), "semantic");
}

TEST(Corruption, SemanticValuesComeFromOtherColumns) {
  const Table t = numbered(200);
  std::set<std::string> zips;
  for (const auto& row : t.rows) zips.insert(row.at("zip"));
  const auto [bad, report] = inject_errors(t, {"city", 0.3, 0.0, 4});
  for (const auto& e : report.entries) {
    EXPECT_TRUE(zips.count(e.corrupted)) << e.corrupted;
    EXPECT_NE(e.corrupted, e.original);
    EXPECT_EQ(bad.cell(e.row, "city"), e.corrupted);
  }
}

TEST(Corruption, SyntacticInsertsOneToThreeLetters) {
  const Table t = numbered(300);
  const auto [bad, report] = inject_errors(t, {"zip", 0.0, 0.5, 8});
  ASSERT_EQ(report.entries.size(), 150u);
  for (const auto& e : report.entries) {
    std::size_t extra = 0;
    ASSERT_TRUE(is_insertion(e.original, e.corrupted, extra)) << e.original << " -> " << e.corrupted;
    EXPECT_GE(extra, 1u);
    EXPECT_LE(extra, 3u);
  }
}

TEST(Corruption, OnlyReportedCellsChange) {
  const Table t = numbered(500);
  const auto [bad, report] = inject_errors(t, {"city", 0.2, 0.2, 5});
  std::set<std::size_t> touched;
  for (const auto& e : report.entries) EXPECT_TRUE(touched.insert(e.row).second) << "row twice";
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    EXPECT_EQ(bad.cell(r, "zip"), t.cell(r, "zip"));
    if (!touched.count(r)) EXPECT_EQ(bad.cell(r, "city"), t.cell(r, "city"));
  }
  const auto flags = report.error_flags(t.num_rows(), "city");
  for (std::size_t r = 0; r < t.num_rows(); ++r) EXPECT_EQ(flags[r], touched.count(r) == 1);
}

TEST(Corruption, DeterministicPerSeed) {
  const Table t = numbered(100);
  const auto a = inject_errors(t, {"city", 0.25, 0.25, 7}).second;
  const auto b = inject_errors(t, {"city", 0.25, 0.25, 7}).second;
  const auto c = inject_errors(t, {"city", 0.25, 0.25, 8}).second;
  EXPECT_EQ(report_to_jsonl(a), report_to_jsonl(b));
  EXPECT_NE(report_to_jsonl(a), report_to_jsonl(c));
}

TEST(Corruption, RejectsBadSettings) {
  const Table t = numbered(10);
  EXPECT_THROW(inject_errors(t, {"city", 0.7, 0.7, 0}), ConfigError);
  EXPECT_THROW(inject_errors(t, {"city", -0.1, 0.0, 0}), ConfigError);
  EXPECT_THROW(inject_errors(t, {"nope", 0.1, 0.1, 0}), DataError);
  const Table single = make_table("s", "", {"only"}, {{"a"}, {"b"}});
  EXPECT_THROW(inject_errors(single, {"only", 0.5, 0.0, 0}), DataError);
}

TEST(Corruption, ReportJsonlRoundTrip) {
  const Table t = numbered(40);
  const auto report = inject_errors(t, {"city", 0.25, 0.25, 3}).second;
  const auto dir = tabprompt::testing::scratch_dir("corruption_report");
  write_report(report, dir / "r.jsonl");
  const auto back = read_report(dir / "r.jsonl");
  ASSERT_EQ(back.entries.size(), report.entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].row, report.entries[i].row);
    EXPECT_EQ(back.entries[i].kind, report.entries[i].kind);
    EXPECT_EQ(back.entries[i].corrupted, report.entries[i].corrupted);
    EXPECT_EQ(back.entries[i].original, report.entries[i].original);
  }
  EXPECT_THROW(report_from_jsonl("{\"row\": 1}\n"), DataError);
}
