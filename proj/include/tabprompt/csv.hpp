#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabprompt/table.hpp"

namespace tabprompt {

/// RFC-4180 style records: quoted fields may contain commas, quotes ("")
/// and line breaks. Accepts LF and CRLF line endings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// First record is the header. Cells are kept verbatim. Ragged rows are
/// rejected with their 1-based data row number.
Table parse_csv_table(std::string_view text, std::string name = {}, std::string description = {});

Table load_csv(const std::filesystem::path& path, std::string description = {});

std::string format_csv_field(std::string_view field);
std::string to_csv(const Table& table);
void write_csv(const Table& table, const std::filesystem::path& path);

}  // namespace tabprompt
