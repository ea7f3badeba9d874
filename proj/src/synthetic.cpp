#include "tabprompt/synthetic.hpp"

#include "tabprompt/errors.hpp"
#include "tabprompt/random.hpp"

namespace tabprompt {

Table make_synthetic_table(const SyntheticSpec& spec) {
  if (spec.feature_columns == 0 || spec.cardinality == 0) {
    throw ConfigError("synthetic", "need at least one feature column and one value");
  }
  std::vector<std::string> columns;
  for (std::size_t c = 0; c < spec.feature_columns; ++c) columns.push_back("c" + std::to_string(c));
  columns.push_back(spec.label_column);
  std::size_t key = columns.size();
  for (std::size_t c = 0; c < spec.feature_columns; ++c) {
    if (columns[c] == spec.key_column) key = c;
  }
  if (key == columns.size()) throw ConfigError("synthetic.key_column", "not a feature column");

  Rng rng(spec.seed);
  std::vector<std::vector<std::string>> cells;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    std::vector<std::string> row;
    std::size_t key_value = 0;
    for (std::size_t c = 0; c < spec.feature_columns; ++c) {
      const std::size_t v = rng.below(spec.cardinality);
      if (c == key) key_value = v;
      row.push_back("v" + std::to_string(c) + "_" + std::to_string(v));
    }
    row.push_back("class_" + std::to_string(key_value));
    cells.push_back(std::move(row));
  }
  return make_table("synthetic", "This dataset contains synthetic records with categorical features",
                    std::move(columns), std::move(cells));
}

}  // namespace tabprompt
