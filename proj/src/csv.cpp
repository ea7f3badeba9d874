#include "tabprompt/csv.hpp"

#include <fstream>
#include <sstream>

#include "tabprompt/errors.hpp"

namespace tabprompt {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    // A bare empty line is not a record; `""` on its own line is.
    if (record_started) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw DataError("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_quoted = true;
        record_started = true;
        break;
      case ',':
        record_started = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_quoted) {
          throw DataError("line " + std::to_string(line) + ": text after closing quote");
        }
        record_started = true;
        field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field at end of input");
  end_record();
  return records;
}

Table parse_csv_table(std::string_view text, std::string name, std::string description) {
  auto records = parse_csv(text);
  if (records.empty()) throw DataError("CSV has no header row");
  std::vector<std::string> header = std::move(records.front());
  std::vector<std::vector<std::string>> cells;
  cells.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      // Row numbers count the header as row 1.
      throw DataError("ragged row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(records[r].size()));
    }
    cells.push_back(std::move(records[r]));
  }
  return make_table(std::move(name), std::move(description), std::move(header), std::move(cells));
}

Table load_csv(const std::filesystem::path& path, std::string description) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_table(buf.str(), path.stem().string(), std::move(description));
}

std::string format_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

void append_record(std::string& out, std::span<const std::string> fields) {
  if (fields.size() == 1 && fields[0].empty()) {
    out += "\"\"\n";
    return;
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += format_csv_field(fields[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  append_record(out, table.columns());
  for (const auto& row : table.rows) append_record(out, row.cells());
  return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file " + path.string());
  out << to_csv(table);
}

}  // namespace tabprompt
