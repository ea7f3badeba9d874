#pragma once

#include <cstdint>
#include <string>

#include "tabprompt/table.hpp"

namespace tabprompt {

/// A desk-scale imputation dataset: feature columns c0..c{n-1}, each with a
/// small categorical domain, and a "label" column determined by one key
/// feature. Pairs with the oracle Task-LM for end-to-end checks.
struct SyntheticSpec {
  std::size_t rows = 120;
  std::size_t feature_columns = 10;
  std::size_t cardinality = 6;
  std::string key_column = "c3";
  std::string label_column = "label";
  std::uint64_t seed = 0;
};

Table make_synthetic_table(const SyntheticSpec& spec);

}  // namespace tabprompt
