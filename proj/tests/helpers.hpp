#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tabprompt/table.hpp"

namespace tabprompt::testing {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TABPROMPT_FIXTURES) / name;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tabprompt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Table laptops() {
  return make_table("laptops", "Laptop listings with brand, price and category",
                    {"Brand", "Price", "Category", "Screen"},
                    {{"Dell", "$349.00", "Laptop", "15"},
                     {"HP", "$499.00", "Laptop", "14"},
                     {"Apple", "$999.00", "Ultrabook", "13"},
                     {"Lenovo", "$279.00", "Netbook", "11"},
                     {"Asus", "$649.00", "Gaming", "17"},
                     {"Acer", "$399.00", "Laptop", "15"}});
}

}  // namespace tabprompt::testing
