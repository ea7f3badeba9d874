// Command-line front end: ingest, corrupt, train, evaluate, sweep, build-prompt.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabprompt/app.hpp"
#include "tabprompt/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kTransport = 4, kModel = 5 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", flags.seed, "Seed; overrides the config's seed");
  cmd->add_option("--out", flags.out, "Output directory; overrides output_dir");
}

tabprompt::RunConfig resolve(const CommonFlags& flags) {
  tabprompt::RunConfig config = tabprompt::load_config(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.train.seed = *flags.seed;
  }
  if (!flags.out.empty()) {
    config.output_dir = std::filesystem::absolute(flags.out).string();
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Column selection and few-shot prompt generation for tabular LLM tasks"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* ingest = app.add_subcommand("ingest", "Load the dataset, validate the task and write the splits");
  auto* corrupt = app.add_subcommand("corrupt", "Inject semantic and syntactic errors into a column");
  auto* train = app.add_subcommand("train", "Train the column-selection agent");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate experimental conditions on the test split");
  auto* sweep = app.add_subcommand("sweep", "Evaluate every ordering of a column set");
  auto* build = app.add_subcommand("build-prompt", "Print the rendered prompt for one row");
  for (auto* cmd : {ingest, corrupt, train, evaluate, sweep, build}) add_common(cmd, flags);

  bool resume = false;
  train->add_flag("--resume", resume, "Continue from the run directory's checkpoint");
  std::vector<std::string> conditions;
  evaluate->add_option("--condition", conditions, "Condition name; repeatable (default: config list)");
  std::optional<std::size_t> row;
  std::vector<std::string> columns;
  build->add_option("--row", row, "Row index (default: first test row)");
  build->add_option("--columns", columns, "Columns in order (default: manual_columns)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const tabprompt::RunConfig config = resolve(flags);
    if (ingest->parsed()) {
      const auto s = tabprompt::run_ingest(config);
      std::cout << "ingested " << s.rows << " rows, " << s.columns.size() << " columns; splits "
                << s.splits.train.size() << "/" << s.splits.validation.size() << "/" << s.splits.test.size()
                << "\n";
    } else if (corrupt->parsed()) {
      const auto report = tabprompt::run_corrupt(config);
      std::cout << "corrupted " << report.entries.size() << " cells -> "
                << tabprompt::run_directory(config).string() << "\n";
    } else if (train->parsed()) {
      const auto out = tabprompt::run_train(config, resume);
      std::cout << "policy:";
      for (const auto& c : out.policy) std::cout << ' ' << c;
      std::cout << "\n";
    } else if (evaluate->parsed()) {
      for (const auto& r : tabprompt::run_evaluate(config, conditions)) {
        std::cout << r.condition << ' ' << r.metric_name << ' ' << r.value << " +- " << r.stddev << "\n";
      }
    } else if (sweep->parsed()) {
      const auto s = tabprompt::run_sweep(config);
      std::cout << s.entries.size() << " sequences; min " << s.min << " median " << s.median << " max "
                << s.max << "\n";
    } else if (build->parsed()) {
      std::cout << tabprompt::run_build_prompt(config, row, columns);
    }
    return kOk;
  } catch (const tabprompt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const tabprompt::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const tabprompt::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kTransport;
  } catch (const tabprompt::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
