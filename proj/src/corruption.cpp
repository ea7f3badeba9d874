#include "tabprompt/corruption.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "tabprompt/errors.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

std::string_view to_string(CorruptionKind kind) {
  return kind == CorruptionKind::Semantic ? "semantic" : "syntactic";
}

std::vector<bool> CorruptionReport::error_flags(std::size_t num_rows,
                                                const std::string& column) const {
  std::vector<bool> flags(num_rows, false);
  for (const auto& e : entries) {
    if (e.column == column && e.row < num_rows) flags[e.row] = true;
  }
  return flags;
}

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

// Distinct non-empty values per column, in order of first appearance.
std::vector<std::vector<std::string>> distinct_values(const Table& table) {
  std::vector<std::vector<std::string>> out(table.schema->size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    std::unordered_set<std::string> seen;
    for (const auto& row : table.rows) {
      const auto& v = row.at(c);
      if (!v.empty() && seen.insert(v).second) out[c].push_back(v);
    }
  }
  return out;
}

std::string insert_letters(const std::string& original, Rng& rng) {
  std::string out = original;
  const std::size_t count = 1 + rng.below(3);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = rng.below(out.size() + 1);
    const char letter = static_cast<char>('a' + rng.below(26));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), letter);
  }
  return out;
}

}  // namespace

std::pair<Table, CorruptionReport> inject_errors(const Table& table,
                                                 const CorruptionSettings& settings) {
  const std::size_t col = table.schema->index_of(settings.column);
  const double sem = settings.semantic_rate;
  const double syn = settings.syntactic_rate;
  if (!(sem >= 0 && sem <= 1 && syn >= 0 && syn <= 1) || sem + syn > 1.0 + 1e-12) {
    throw ConfigError("corruption.rates", "rates must lie in [0, 1] and sum to at most 1");
  }
  if (table.schema->size() < 2) {
    throw DataError("error injection needs a second column to draw out-of-domain values from");
  }

  const std::size_t n = table.num_rows();
  const std::size_t n_sem = std::min(n, round_half_up(sem * static_cast<double>(n)));
  const std::size_t n_syn = std::min(n - n_sem, round_half_up(syn * static_cast<double>(n)));

  Rng rng(settings.seed);
  const auto picked = rng.sample_without_replacement(n, n_sem + n_syn);
  const auto donors = distinct_values(table);

  CorruptionReport report;
  report.seed = settings.seed;
  std::vector<std::vector<std::string>> cells;
  cells.reserve(n);
  for (const auto& row : table.rows) cells.emplace_back(row.cells().begin(), row.cells().end());

  std::vector<std::size_t> other_columns;
  for (std::size_t c = 0; c < table.schema->size(); ++c) {
    if (c != col) other_columns.push_back(c);
  }

  for (std::size_t i = 0; i < picked.size(); ++i) {
    const std::size_t r = picked[i];
    const std::string& original = cells[r][col];
    CorruptionEntry entry{r, settings.column, CorruptionKind::Semantic, original, {}};
    if (i < n_sem) {
      // Uniform donor column; fall through the remaining columns in a seeded
      // order if the first has no value that differs from the original.
      std::vector<std::size_t> order = other_columns;
      std::swap(order[0], order[rng.below(order.size())]);
      bool found = false;
      for (std::size_t donor : order) {
        std::vector<const std::string*> pool;
        for (const auto& v : donors[donor]) {
          if (v != original) pool.push_back(&v);
        }
        if (pool.empty()) continue;
        entry.corrupted = *pool[rng.below(pool.size())];
        found = true;
        break;
      }
      if (!found) {
        throw DataError("no out-of-domain value available for row " + std::to_string(r + 1));
      }
    } else {
      entry.kind = CorruptionKind::Syntactic;
      entry.corrupted = insert_letters(original, rng);
    }
    cells[r][col] = entry.corrupted;
    report.entries.push_back(std::move(entry));
  }

  std::sort(report.entries.begin(), report.entries.end(),
            [](const auto& a, const auto& b) { return a.row < b.row; });
  Table corrupted = make_table(table.name, table.description, table.columns(), std::move(cells));
  return {std::move(corrupted), std::move(report)};
}

std::string report_to_jsonl(const CorruptionReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    nlohmann::ordered_json j;
    j["row"] = e.row;
    j["column"] = e.column;
    j["kind"] = to_string(e.kind);
    j["original"] = e.original;
    j["corrupted"] = e.corrupted;
    j["seed"] = report.seed;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

CorruptionReport report_from_jsonl(const std::string& text) {
  CorruptionReport report;
  std::istringstream in(text);
  std::string line;
  std::set<std::pair<std::size_t, std::string>> seen;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++line_no;
    nlohmann::json j;
    CorruptionEntry e;
    std::string kind;
    try {
      j = nlohmann::json::parse(line);
      e.row = j.at("row").get<std::size_t>();
      e.column = j.at("column").get<std::string>();
      kind = j.at("kind").get<std::string>();
      e.original = j.at("original").get<std::string>();
      e.corrupted = j.at("corrupted").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw DataError("corruption report line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (kind == "semantic") {
      e.kind = CorruptionKind::Semantic;
    } else if (kind == "syntactic") {
      e.kind = CorruptionKind::Syntactic;
    } else {
      throw DataError("unknown corruption kind '" + kind + "'");
    }
    if (j.contains("seed")) report.seed = j["seed"].get<std::uint64_t>();
    if (!seen.emplace(e.row, e.column).second) {
      throw DataError("corruption report lists row " + std::to_string(e.row) + " twice");
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_report(const CorruptionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << report_to_jsonl(report);
}

CorruptionReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_jsonl(buf.str());
}

}  // namespace tabprompt
