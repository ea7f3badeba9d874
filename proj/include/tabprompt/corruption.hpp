#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tabprompt/table.hpp"

namespace tabprompt {

enum class CorruptionKind { Semantic, Syntactic };

std::string_view to_string(CorruptionKind kind);

struct CorruptionEntry {
  std::size_t row = 0;
  std::string column;
  CorruptionKind kind = CorruptionKind::Semantic;
  std::string original;
  std::string corrupted;
};

struct CorruptionReport {
  std::vector<CorruptionEntry> entries;
  std::uint64_t seed = 0;

  /// Per-row error flags for `column`, i.e. the ED gold labels.
  std::vector<bool> error_flags(std::size_t num_rows, const std::string& column) const;
};

struct CorruptionSettings {
  std::string column;
  double semantic_rate = 0.25;
  double syntactic_rate = 0.25;
  std::uint64_t seed = 0;
};

/// Replaces round(semantic_rate * n) cells of the column with values drawn from
/// other columns, and a disjoint round(syntactic_rate * n) cells with copies
/// that have 1-3 random lowercase letters inserted. Pure in its inputs.
std::pair<Table, CorruptionReport> inject_errors(const Table& table, const CorruptionSettings& settings);

/// One JSON object per line: row, column, kind, original, corrupted.
std::string report_to_jsonl(const CorruptionReport& report);
CorruptionReport report_from_jsonl(const std::string& text);
void write_report(const CorruptionReport& report, const std::filesystem::path& path);
CorruptionReport read_report(const std::filesystem::path& path);

}  // namespace tabprompt
